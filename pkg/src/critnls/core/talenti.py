"""Talenti bubbles U_ρ, their norms, the limit energy m₀ and the optimal scale ρ₀.

U_ρ(r) = ρ^{−(N−2)/2} [N(N−2)]^{(N−2)/4} (1 + (r/ρ)²)^{−(N−2)/2}  solves
−ΔU = U^{2*−1}.  All bubble integrals reduce to the moments

    M(c, α) = ∫₀^∞ x^{c−1} (1 + x²)^{−α} dx,

evaluated here by composite Gauss–Legendre on a geometric panel mesh plus the
exact large-x binomial series of the integrand.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from critnls.core.norms import NormSet
from critnls.core.params import Exponent, exponents_for, gq_constants, critical_exponent
from critnls.errors import DimensionError, DivergentNormError, DomainError
from critnls.solver.profile import RadialProfile, TailModel, critical_coefficients

logger = logging.getLogger(__name__)

_GL_ORDER = 20
_FIRST_PANEL = 0.5
_PANEL_RATIO = 1.3
_SERIES_TERMS = 400


def sphere_area(dim: int) -> float:
    """ω_{N−1} = 2π^{N/2} / Γ(N/2)."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def sobolev_constant(dim: int) -> float:
    """S = πN(N−2)(Γ(N/2)/Γ(N))^{2/N}."""
    if dim < 3:
        raise DimensionError(f"Dimension must be >= 3, got {dim}")
    return math.pi * dim * (dim - 2) * (math.gamma(dim / 2.0) / math.gamma(dim)) ** (2.0 / dim)


def m0_closed_form(dim: int) -> float:
    return sobolev_constant(dim) ** (dim / 2.0) / dim


@dataclass(frozen=True)
class TalentiBubble:
    dim: int
    rho: float = 1.0

    def __post_init__(self) -> None:
        if self.dim < 3:
            raise DimensionError(f"Dimension must be >= 3, got {self.dim}")
        if not self.rho > 0.0:
            raise DomainError(f"Bubble scale must be positive, got {self.rho}")

    @property
    def s(self) -> float:
        return (self.dim - 2) / 2.0

    @property
    def peak(self) -> float:
        """U_ρ(0)."""
        return self.rho ** (-self.s) * (self.dim * (self.dim - 2)) ** (self.s / 2.0)

    def value(self, r):
        x = np.asarray(r, dtype=float) / self.rho
        return self.peak * (1.0 + x * x) ** (-self.s)

    def derivative(self, r):
        x = np.asarray(r, dtype=float) / self.rho
        return -2.0 * self.s * self.peak / self.rho * x * (1.0 + x * x) ** (-self.s - 1.0)

    def second_derivative(self, r):
        x = np.asarray(r, dtype=float) / self.rho
        base = 1.0 + x * x
        return (
            -2.0 * self.s * self.peak / self.rho**2
            * (base ** (-self.s - 1.0) - 2.0 * (self.s + 1.0) * x * x * base ** (-self.s - 2.0))
        )


def talenti_eval(bubble: TalentiBubble, r: float) -> float:
    if r < 0.0:
        raise DomainError(f"Radius must be >= 0, got {r}")
    return float(bubble.value(r))


# ── Moments ─────────────────────────────────────────────────────────


@lru_cache(maxsize=None)
def _panel_rule(cut: float) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(_GL_ORDER)
    edges = [0.0, _FIRST_PANEL]
    while edges[-1] < cut:
        edges.append(min(edges[-1] * _PANEL_RATIO, cut))
    edges = np.asarray(edges)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    x = (0.5 * (left + right))[:, None] + half[:, None] * nodes[None, :]
    w = half[:, None] * weights[None, :]
    return x.ravel(), w.ravel()


def _series_tail(c: float, alpha: float, cut: float) -> float:
    # (1+x²)^{−α} = Σ_j binom(−α, j) x^{−2α−2j} for x > 1
    total = 0.0
    coeff = 1.0
    for j in range(_SERIES_TERMS):
        decay = 2.0 * alpha + 2.0 * j - c
        term = coeff * cut ** (-decay) / decay
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
        coeff *= -(alpha + j) / (j + 1.0)
    return total


def bubble_moment(c: float, alpha: float) -> float:
    """M(c, α) = ∫₀^∞ x^{c−1}(1+x²)^{−α} dx; ``math.inf`` when 2α ≤ c."""
    if 2.0 * alpha <= c:
        return math.inf
    # the series ratio is bounded by (α+1)/cut², kept below 1/16
    cut = max(8.0, 4.0 * math.sqrt(alpha + 1.0))
    x, w = _panel_rule(cut)
    head = float(np.sum(w * x ** (c - 1.0) * (1.0 + x * x) ** (-alpha)))
    return head + _series_tail(c, alpha, cut)


def bubble_moment_closed_form(c: float, alpha: float) -> float:
    """½·B(c/2, α − c/2), the Beta-function value of ``bubble_moment``."""
    if 2.0 * alpha <= c:
        return math.inf
    return 0.5 * math.exp(math.lgamma(c / 2.0) + math.lgamma(alpha - c / 2.0) - math.lgamma(alpha))


# ── Norms ───────────────────────────────────────────────────────────


def _lebesgue(dim: int, exponent: float) -> float:
    s = (dim - 2) / 2.0
    peak = (dim * (dim - 2)) ** (s / 2.0)
    return sphere_area(dim) * peak**exponent * bubble_moment(float(dim), exponent * s)


def _gradient(dim: int) -> float:
    s = (dim - 2) / 2.0
    peak = (dim * (dim - 2)) ** (s / 2.0)
    return sphere_area(dim) * (2.0 * s * peak) ** 2 * bubble_moment(dim + 2.0, float(dim))


@lru_cache(maxsize=None)
def _unit_norms(dim: int, q: float) -> NormSet:
    return NormSet(
        grad_sq=_gradient(dim),
        l2_sq=_lebesgue(dim, 2.0),
        lq=_lebesgue(dim, q),
        lcrit=_lebesgue(dim, critical_exponent(dim)),
    )


def talenti_norms(dim: int, q: Exponent, rho: float = 1.0, require_l2: bool = False) -> NormSet:
    """Norms of U_ρ; ρ ≠ 1 is obtained from U₁ through the exact scalings.

    ‖U₁‖₂² is infinite for N ≤ 4 (and ‖U₁‖_q^q for q ≤ N/(N−2)).
    """
    exps = exponents_for(dim, q)
    if require_l2 and dim <= 4:
        raise DivergentNormError(f"‖U₁‖₂ is infinite for N={dim}; a finite L² norm needs N >= 5")
    unit = _unit_norms(dim, float(q))
    if rho == 1.0:
        return unit
    lq_power = 2.0 * (exps.two_star - float(q)) / (exps.two_star - 2.0)
    return unit.scaled(l2=rho**2, lq=rho**lq_power)


def sobolev_m0(dim: int) -> float:
    """m₀ = ‖∇U₁‖₂² / N from quadrature."""
    if dim < 3:
        raise DimensionError(f"Dimension must be >= 3, got {dim}")
    return _gradient(dim) / dim


def rho0(dim: int, q: Exponent) -> float:
    """Scale of the bubble U_{ρ₀} selected as λ → 0 when N ≥ 5."""
    exps = exponents_for(dim, q)
    if dim <= 4:
        raise DivergentNormError(f"rho0 needs a finite ‖U₁‖₂, which requires N >= 5 (got N={dim})")
    unit = talenti_norms(dim, q)
    return (exps.l2_lq_ratio * unit.lq / unit.l2_sq) ** (exps.sigma / 2.0)


def g0(dim: int, q: Exponent, rho: float) -> float:
    """g₀(ρ) = (1/q)‖U_ρ‖_q^q − ½‖U_ρ‖₂², maximal at ρ₀."""
    norms = talenti_norms(dim, q, rho=rho, require_l2=True)
    return norms.lq / float(q) - 0.5 * norms.l2_sq


def c0_ratio(dim: int, q: Exponent) -> float:
    """(‖U₁‖_q^{q(2*−2)} / ‖U₁‖₂^{2(2*−q)})^{1/(q−2)} for this (N, q)."""
    exps = exponents_for(dim, q)
    unit = talenti_norms(dim, q, require_l2=True)
    qf = float(q)
    log_ratio = ((exps.two_star - 2.0) * math.log(unit.lq) - (exps.two_star - qf) * math.log(unit.l2_sq)) / (qf - 2.0)
    return math.exp(log_ratio)


def g0_at_rho0_closed_form(dim: int, q: Exponent) -> float:
    """(1/q)(2/q)^{(2*−q)/(q−2)} G(q) · c0_ratio(N, q) = g₀(ρ₀)."""
    exps = exponents_for(dim, q)
    qf = float(q)
    _, big_g = gq_constants(dim, q)
    return (2.0 / qf) ** ((exps.two_star - qf) / (qf - 2.0)) * big_g * c0_ratio(dim, q) / qf


def talenti_profile(
    bubble: TalentiBubble,
    outer_factor: float = 1e4,
    inner_factor: float = 1e-4,
    points_per_decade: int = 400,
) -> RadialProfile:
    """U_ρ sampled on a geometric grid with its algebraic r^{−(N−2)} tail."""
    decades = math.log10(outer_factor / inner_factor)
    count = int(round(decades * points_per_decade)) + 1
    grid = np.concatenate(([0.0], bubble.rho * np.logspace(math.log10(inner_factor), math.log10(outer_factor), count)))
    outer = grid[-1]
    power = float(bubble.dim - 2)
    tail = TailModel(float(bubble.value(outer)) * outer**power, 0.0, power)
    logger.debug("Sampled U_rho (N=%d, rho=%g) on %d points", bubble.dim, bubble.rho, grid.size)
    return RadialProfile(
        dim=bubble.dim,
        grid=grid,
        values=bubble.value(grid),
        derivs=bubble.derivative(grid),
        curvs=bubble.second_derivative(grid),
        tail=tail,
        coeffs=critical_coefficients(bubble.dim),
    )
