"""Problem parameters, derived exponents and the closed-form constants Q, G.

The problem is  −Δu + u = u^{2*−1} + λ u^{q−1}  on ℝ^N (radial), with
2 < q < 2* = 2N/(N−2).  ``ProblemParams`` is the single source of truth for
(N, q, λ); every exponent used elsewhere comes from ``derive_exponents``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from critnls.errors import DimensionError, DomainError, ExponentRangeError

Exponent = Union[float, Fraction]

# q closer than this to 2 or 2* is rejected; endpoint values go through GQLimit.
GUARD_BAND = 1e-9


class Existence(Enum):
    EXISTS = "exists"
    EXISTS_FOR_LARGE_LAMBDA = "exists_for_large_lambda"
    UNKNOWN = "unknown"


class GQLimit(Enum):
    """Endpoint of (2, 2*) at which Q and G are evaluated as limits."""

    LOWER = "lower"
    UPPER = "upper"


def parse_exponent(text: str) -> Exponent:
    """Parse ``"7/2"`` as an exact Fraction and anything else as a float."""
    value = text.strip()
    if "/" in value:
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"Invalid rational exponent '{text}'") from exc
    return float(value)


def critical_exponent(dim: int) -> float:
    _check_dim(dim)
    return 2.0 * dim / (dim - 2)


def _critical_exponent_exact(dim: int) -> Fraction:
    return Fraction(2 * dim, dim - 2)


def _check_dim(dim: int) -> None:
    if isinstance(dim, bool) or int(dim) != dim or dim < 3:
        raise DimensionError(f"Dimension must be an integer N >= 3, got {dim!r}")


def _check_q(dim: int, q: Exponent) -> None:
    two_star = critical_exponent(dim)
    qf = float(q)
    if not (2.0 + GUARD_BAND < qf < two_star - GUARD_BAND):
        raise ExponentRangeError(
            f"Exponent q must lie in (2, 2*) = (2, {two_star:.6g}) for N={dim}, got {q}"
        )


@dataclass(frozen=True)
class ProblemParams:
    dim: int
    q: Exponent
    lam: float = 0.0

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        _check_q(self.dim, self.q)
        if not (self.lam >= 0.0) or math.isinf(self.lam):
            raise DomainError(f"Coupling lambda must be a finite value >= 0, got {self.lam!r}")

    @property
    def q_float(self) -> float:
        return float(self.q)

    def with_lambda(self, lam: float) -> "ProblemParams":
        return ProblemParams(self.dim, self.q, lam)


@dataclass(frozen=True)
class Exponents:
    two_star: float
    sigma: float
    s: float
    # 2(2*−q) / (q(2*−2)): the ratio ‖v‖₂² / ‖v‖_q^q forced on solutions.
    l2_lq_ratio: float


def derive_exponents(params: ProblemParams) -> Exponents:
    dim, q = params.dim, params.q
    _check_q(dim, q)
    if isinstance(q, Fraction):
        two_star = _critical_exponent_exact(dim)
        sigma = (two_star - 2) / (q - 2)
        ratio = 2 * (two_star - q) / (q * (two_star - 2))
        return Exponents(float(two_star), float(sigma), (dim - 2) / 2.0, float(ratio))
    two_star_f = critical_exponent(dim)
    qf = float(q)
    return Exponents(
        two_star=two_star_f,
        sigma=4.0 / ((dim - 2) * (qf - 2.0)),
        s=(dim - 2) / 2.0,
        l2_lq_ratio=2.0 * (two_star_f - qf) / (qf * (two_star_f - 2.0)),
    )


def exponents_for(dim: int, q: Exponent) -> Exponents:
    """``derive_exponents`` without a coupling value."""
    return derive_exponents(ProblemParams(dim, q, 0.0))


def gq_constants(dim: int, q: Exponent | None = None, limit: GQLimit | None = None) -> tuple[float, float]:
    """Q(q) = ((2*−q)/(2*−2))^{(2*−q)/(q−2)} and G(q) = ((q−2)/(2*−2))·Q(q).

    With ``limit`` set, returns the one-sided limit at q → 2⁺ (Q → e^{−1},
    G → 0) or q → 2*⁻ (Q → 1, G → 1) and ``q`` is ignored.
    """
    _check_dim(dim)
    if limit is GQLimit.LOWER:
        return math.exp(-1.0), 0.0
    if limit is GQLimit.UPPER:
        return 1.0, 1.0
    if q is None:
        raise ExponentRangeError("gq_constants needs q unless a limit is requested")
    _check_q(dim, q)
    if isinstance(q, Fraction):
        two_star = _critical_exponent_exact(dim)
        base = float((two_star - q) / (two_star - 2))
        power = float((two_star - q) / (q - 2))
        lead = float((q - 2) / (two_star - 2))
    else:
        two_star_f = critical_exponent(dim)
        qf = float(q)
        base = (two_star_f - qf) / (two_star_f - 2.0)
        power = (two_star_f - qf) / (qf - 2.0)
        lead = (qf - 2.0) / (two_star_f - 2.0)
    big_q = base**power
    return big_q, lead * big_q


def endpoint_limits(dim: int) -> dict[str, float]:
    """Analytic endpoint limits of the auxiliary powers entering the energy bounds."""
    _check_dim(dim)
    return {
        # lim_{q→2} (2/q)^{(2*−q)/(q−2)}
        "two_over_q_power_at_2": math.exp(-2.0 / (dim - 2)),
        # lim_{q→2*} (1/(2*−q)) ((2*−q)/(2*−2))^{(2*−2)/(q−2)}
        "scaled_ratio_at_critical": (dim - 2) / 4.0,
        "Q_at_2": math.exp(-1.0),
        "Q_at_critical": 1.0,
    }


def existence_region(params: ProblemParams) -> Existence:
    if params.dim >= 4:
        return Existence.EXISTS
    if params.q_float > 4.0:
        return Existence.EXISTS
    return Existence.EXISTS_FOR_LARGE_LAMBDA
