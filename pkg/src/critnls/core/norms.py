from __future__ import annotations

import math
from dataclasses import dataclass, replace

INFINITE = "infinite"


@dataclass(frozen=True)
class NormSet:
    """(A, ‖u‖₂², B, C) = (‖∇u‖₂², ‖u‖₂², ‖u‖_q^q, ‖u‖_{2*}^{2*}).

    Divergent entries are stored as ``math.inf``.
    """

    grad_sq: float
    l2_sq: float
    lq: float
    lcrit: float

    def as_dict(self) -> dict[str, float | str]:
        return {
            name: (INFINITE if math.isinf(value) else value)
            for name, value in (
                ("grad_sq", self.grad_sq),
                ("l2_sq", self.l2_sq),
                ("lq", self.lq),
                ("lcrit", self.lcrit),
            )
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormSet":
        def _value(raw) -> float:
            return math.inf if raw == INFINITE else float(raw)

        return cls(*(_value(data[key]) for key in ("grad_sq", "l2_sq", "lq", "lcrit")))

    def scaled(self, grad: float = 1.0, l2: float = 1.0, lq: float = 1.0, lcrit: float = 1.0) -> "NormSet":
        return replace(
            self,
            grad_sq=self.grad_sq * grad,
            l2_sq=self.l2_sq * l2,
            lq=self.lq * lq,
            lcrit=self.lcrit * lcrit,
        )

    def interpolation_holds(self, q: float, two_star: float, rel: float = 1e-9) -> bool:
        """B ≤ ‖u‖₂^{2(2*−q)/(2*−2)} · C^{(q−2)/(2*−2)}."""
        theta = (two_star - q) / (two_star - 2.0)
        bound = self.l2_sq**theta * self.lcrit ** (1.0 - theta)
        return self.lq <= bound * (1.0 + rel)

    def sobolev_holds(self, sobolev: float, two_star: float, rel: float = 1e-9) -> bool:
        """C^{2/2*} ≤ A / S."""
        return self.lcrit ** (2.0 / two_star) <= self.grad_sq / sobolev * (1.0 + rel)
