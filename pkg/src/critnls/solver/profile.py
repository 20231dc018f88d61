"""Radial profiles, their far-field tail models and the ODE coefficients they solve.

Every radial problem handled here has the form

    u″ + ((N−1)/r) u′ = a·u − Σ_k b_k u^{p_k−1},

described by ``RadialCoefficients``.  A dilation  x ↦ α·f(kx)  maps solutions
to solutions with coefficients  a ↦ k²a,  b_k ↦ k² α^{2−p_k} b_k, which is how
the (Q_λ), (R_λ) and λ→∞ frames are derived from the original equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline
from scipy.special import kve

from critnls.core.params import ProblemParams, critical_exponent, derive_exponents
from critnls.errors import DomainError


# ── ODE coefficients ────────────────────────────────────────────────


@dataclass(frozen=True)
class RadialCoefficients:
    mass: float
    terms: tuple[tuple[float, float], ...]

    def source(self, u):
        """Right-hand side a·u − Σ b|u|^{p−2}u (odd extension below zero)."""
        u = np.asarray(u, dtype=float)
        out = self.mass * u
        for power, coeff in self.terms:
            out = out - coeff * np.abs(u) ** (power - 2.0) * u
        return out

    def source_prime(self, u):
        u = np.asarray(u, dtype=float)
        out = np.full_like(u, self.mass)
        for power, coeff in self.terms:
            out = out - coeff * (power - 1.0) * np.abs(u) ** (power - 2.0)
        return out

    def source_second(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for power, coeff in self.terms:
            out = out - coeff * (power - 1.0) * (power - 2.0) * np.abs(u) ** (power - 3.0) * np.sign(u)
        return out

    def nonlinear_magnitude(self, u):
        """max(a|u|, b_k|u|^{p_k−1}) pointwise; the scale used to normalize residuals."""
        u = np.abs(np.asarray(u, dtype=float))
        out = abs(self.mass) * u
        for power, coeff in self.terms:
            out = np.maximum(out, abs(coeff) * u ** (power - 1.0))
        return out

    def rescaled(self, alpha: float, k: float) -> "RadialCoefficients":
        return RadialCoefficients(
            mass=k * k * self.mass,
            terms=tuple((p, b * k * k * alpha ** (2.0 - p)) for p, b in self.terms),
        )

    def coefficient(self, power: float) -> float:
        for p, b in self.terms:
            if math.isclose(p, power, rel_tol=1e-12, abs_tol=1e-12):
                return b
        return 0.0

    def length_scale(self, height: float) -> float:
        """Natural length of a solution with u(0) = height."""
        rate = abs(self.mass)
        for power, coeff in self.terms:
            rate = max(rate, abs(coeff) * height ** (power - 2.0))
        if rate <= 0.0:
            return 1.0
        return 1.0 / math.sqrt(rate)

    def as_dict(self) -> dict:
        return {"mass": self.mass, "terms": [[p, b] for p, b in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "RadialCoefficients":
        return cls(float(data["mass"]), tuple((float(p), float(b)) for p, b in data["terms"]))


def direct_coefficients(params: ProblemParams) -> RadialCoefficients:
    """−Δu + u = u^{2*−1} + λu^{q−1}."""
    two_star = derive_exponents(params).two_star
    terms = [(two_star, 1.0)]
    if params.lam > 0.0:
        terms.append((params.q_float, params.lam))
    return RadialCoefficients(1.0, tuple(terms))


def soliton_coefficients(q: float) -> RadialCoefficients:
    """−Δv + v = v^{q−1}."""
    return RadialCoefficients(1.0, ((float(q), 1.0),))


def critical_coefficients(dim: int) -> RadialCoefficients:
    """−ΔU = U^{2*−1}."""
    return RadialCoefficients(0.0, ((critical_exponent(dim), 1.0),))


# ── Tail models ─────────────────────────────────────────────────────


class TailKind(Enum):
    # c·r^{−ν}·K_ν(κr): decaying solution of the linearized equation
    BESSEL = "bessel"
    # c·r^{−p}·e^{−κr}; κ = 0 gives a pure algebraic tail
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class TailModel:
    amplitude: float
    rate: float
    power: float
    kind: TailKind = TailKind.EXPONENTIAL

    def __post_init__(self) -> None:
        if self.amplitude < 0.0 or self.rate < 0.0:
            raise DomainError(f"Tail amplitude and rate must be >= 0, got {self.amplitude}, {self.rate}")
        if self.kind is TailKind.BESSEL and self.rate <= 0.0:
            raise DomainError("Bessel tail requires a positive decay rate")

    @property
    def algebraic_power(self) -> float:
        """Exponent p_t in u ≈ c_t r^{−p_t} e^{−κr} as r → ∞."""
        return self.power + 0.5 if self.kind is TailKind.BESSEL else self.power

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is TailKind.BESSEL:
            z = self.rate * r
            return self.amplitude * r ** (-self.power) * kve(self.power, z) * np.exp(-z)
        return self.amplitude * r ** (-self.power) * np.exp(-self.rate * r)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is TailKind.BESSEL:
            z = self.rate * r
            return -self.amplitude * self.rate * r ** (-self.power) * kve(self.power + 1.0, z) * np.exp(-z)
        return self.value(r) * (-self.power / r - self.rate)

    def rescaled(self, alpha: float, k: float) -> "TailModel":
        return TailModel(alpha * self.amplitude * k ** (-self.power), self.rate * k, self.power, self.kind)

    def scaled(self, factor: float) -> "TailModel":
        return TailModel(self.amplitude * factor, self.rate, self.power, self.kind)

    def lebesgue_integral(self, exponent: float, dim: int, start: float) -> float:
        """∫_start^∞ |u|^exponent r^{N−1} dr under the tail model."""
        if self.amplitude == 0.0:
            return 0.0
        if self.kind is TailKind.EXPONENTIAL and self.rate == 0.0:
            decay = exponent * self.power - dim
            if decay <= 0.0:
                return math.inf
            return self.amplitude**exponent * start ** (-decay) / decay
        return _tail_quad(lambda r: np.abs(self.value(r)) ** exponent * r ** (dim - 1), start)

    def gradient_integral(self, dim: int, start: float) -> float:
        if self.amplitude == 0.0:
            return 0.0
        if self.kind is TailKind.EXPONENTIAL and self.rate == 0.0:
            decay = 2.0 * self.power + 2.0 - dim
            if decay <= 0.0:
                return math.inf
            return (self.amplitude * self.power) ** 2 * start ** (-decay) / decay
        return _tail_quad(lambda r: self.derivative(r) ** 2 * r ** (dim - 1), start)

    def as_dict(self) -> dict:
        return {"c": self.amplitude, "kappa": self.rate, "p": self.power, "kind": self.kind.value}

    @classmethod
    def from_dict(cls, data: dict) -> "TailModel":
        return cls(float(data["c"]), float(data["kappa"]), float(data["p"]), TailKind(data.get("kind", "exponential")))


def _tail_quad(integrand, start: float) -> float:
    head = float(integrand(start))
    if head == 0.0 or not math.isfinite(head):
        return 0.0 if head == 0.0 else math.inf
    value, _ = integrate.quad(
        lambda y: float(integrand(start + y)) / head,
        0.0,
        np.inf,
        epsabs=1e-15,
        epsrel=1e-12,
        limit=200,
    )
    return value * head


# ── Radial profile ──────────────────────────────────────────────────


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"Profile {name} must be one-dimensional")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function sampled on ``grid`` (grid[0] = 0) with a far-field tail.

    ``curvs`` holds u″ samples so both u and u′ can be interpolated with cubic
    Hermite splines.
    """

    dim: int
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    curvs: np.ndarray
    tail: TailModel
    coeffs: RadialCoefficients

    def __post_init__(self) -> None:
        for name in ("grid", "values", "derivs", "curvs"):
            object.__setattr__(self, name, _frozen(getattr(self, name), name))
        size = self.grid.size
        if size < 2:
            raise DomainError("Profile needs at least two grid points")
        if any(arr.size != size for arr in (self.values, self.derivs, self.curvs)):
            raise DomainError("Profile arrays must share the grid length")
        if self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0.0):
            raise DomainError("Profile grid must start at 0 and be strictly increasing")

    @property
    def center_value(self) -> float:
        return float(self.values[0])

    @property
    def outer_radius(self) -> float:
        return float(self.grid[-1])

    def value_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.grid, self.values, self.derivs)

    def gradient_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.grid, self.derivs, self.curvs)

    def evaluate(self, r):
        """u(r) from the Hermite interpolant inside the grid and the tail beyond."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        inside = r <= self.outer_radius
        out = np.empty_like(r)
        if np.any(inside):
            out[inside] = self.value_spline()(r[inside])
        if np.any(~inside):
            out[~inside] = self.tail.value(r[~inside])
        return out

    def rescaled(self, alpha: float, k: float) -> "RadialProfile":
        """The profile x ↦ α·u(kx), with matching coefficients."""
        if alpha <= 0.0 or k <= 0.0:
            raise DomainError(f"Dilation factors must be positive, got alpha={alpha}, k={k}")
        return RadialProfile(
            dim=self.dim,
            grid=self.grid / k,
            values=alpha * self.values,
            derivs=alpha * k * self.derivs,
            curvs=alpha * k * k * self.curvs,
            tail=self.tail.rescaled(alpha, k),
            coeffs=self.coeffs.rescaled(alpha, k),
        )

    def scaled(self, factor: float) -> "RadialProfile":
        """Amplitude scaling t·u; the coefficients are carried unchanged."""
        return RadialProfile(
            dim=self.dim,
            grid=self.grid,
            values=factor * self.values,
            derivs=factor * self.derivs,
            curvs=factor * self.curvs,
            tail=self.tail.scaled(abs(factor)),
            coeffs=self.coeffs,
        )

    def truncated(self, radius: float) -> "RadialProfile":
        """Zero extension beyond ``radius`` (keeps grid points r ≤ radius)."""
        keep = self.grid <= radius
        if keep.sum() < 2:
            raise DomainError(f"Truncation radius {radius} leaves fewer than two grid points")
        return RadialProfile(
            dim=self.dim,
            grid=self.grid[keep],
            values=self.values[keep],
            derivs=self.derivs[keep],
            curvs=self.curvs[keep],
            tail=self.tail.scaled(0.0),
            coeffs=self.coeffs,
        )

    @classmethod
    def zeros(cls, dim: int, grid, coeffs: RadialCoefficients) -> "RadialProfile":
        grid = np.asarray(grid, dtype=float)
        zero = np.zeros_like(grid)
        return cls(dim, grid, zero, zero, zero, TailModel(0.0, 0.0, float(dim - 2)), coeffs)
