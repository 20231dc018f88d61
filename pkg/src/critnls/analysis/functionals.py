"""Norms, energies and the Nehari / Pohozaev identities of radial profiles.

Integrals are ω_{N−1}·∫₀^∞ f(r) r^{N−1} dr: Gauss–Legendre on every grid cell
of the cubic Hermite interpolants of u and u′, plus the tail model beyond the
last grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss

from critnls.core.norms import NormSet
from critnls.core.params import ProblemParams, critical_exponent, derive_exponents
from critnls.core.talenti import sobolev_constant, sphere_area
from critnls.errors import DegenerateProfileError, DomainError
from critnls.solver.profile import RadialCoefficients, RadialProfile

_CELL_NODES, _CELL_WEIGHTS = leggauss(6)


def _cell_rule(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    left, right = grid[:-1], grid[1:]
    half = 0.5 * (right - left)
    nodes = (0.5 * (left + right))[:, None] + half[:, None] * _CELL_NODES[None, :]
    weights = half[:, None] * _CELL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def lebesgue_integral(profile: RadialProfile, exponent: float) -> float:
    """‖u‖_p^p."""
    nodes, weights = _cell_rule(profile.grid)
    u = profile.value_spline()(nodes)
    head = float(np.sum(weights * np.abs(u) ** exponent * nodes ** (profile.dim - 1)))
    tail = profile.tail.lebesgue_integral(exponent, profile.dim, profile.outer_radius)
    return sphere_area(profile.dim) * (head + tail)


def gradient_integral(profile: RadialProfile) -> float:
    """‖∇u‖₂²."""
    nodes, weights = _cell_rule(profile.grid)
    du = profile.gradient_spline()(nodes)
    head = float(np.sum(weights * du * du * nodes ** (profile.dim - 1)))
    tail = profile.tail.gradient_integral(profile.dim, profile.outer_radius)
    return sphere_area(profile.dim) * (head + tail)


def radial_norms(profile: RadialProfile, q: float) -> NormSet:
    q = float(q)
    two_star = critical_exponent(profile.dim)
    if not 2.0 < q <= two_star:
        raise DomainError(f"radial_norms needs q in (2, 2*], got {q}")
    return NormSet(
        grad_sq=gradient_integral(profile),
        l2_sq=lebesgue_integral(profile, 2.0),
        lq=lebesgue_integral(profile, q),
        lcrit=lebesgue_integral(profile, two_star),
    )


# ── Energy forms ────────────────────────────────────────────────────


class FormKind(Enum):
    I = "I"
    J = "J"
    JTILDE = "Jtilde"


@dataclass(frozen=True)
class EnergyForm:
    """I for u_λ, J for the (Q_λ) rescaling v_λ, J̃(ξ) for w_λ."""

    kind: FormKind
    xi: float | None = None

    @classmethod
    def original(cls) -> "EnergyForm":
        return cls(FormKind.I)

    @classmethod
    def rescaled(cls) -> "EnergyForm":
        return cls(FormKind.J)

    @classmethod
    def concentrated(cls, xi: float) -> "EnergyForm":
        if not xi or xi <= 0.0:
            raise DomainError(f"Form Jtilde requires xi > 0, got {xi}")
        return cls(FormKind.JTILDE, xi)

    def coefficients(self, params: ProblemParams) -> RadialCoefficients:
        exps = derive_exponents(params)
        q = params.q_float
        if self.kind is FormKind.I:
            return RadialCoefficients(1.0, ((exps.two_star, 1.0), (q, params.lam)))
        weight = params.lam**exps.sigma
        if self.kind is FormKind.J:
            return RadialCoefficients(weight, ((exps.two_star, 1.0), (q, weight)))
        if self.xi is None or self.xi <= 0.0:
            raise DomainError(f"Form Jtilde requires xi > 0, got {self.xi}")
        return RadialCoefficients(
            weight * self.xi ** ((exps.two_star - 2.0) * exps.s),
            ((exps.two_star, 1.0), (q, weight * self.xi ** ((exps.two_star - q) * exps.s))),
        )


def _power_norm(norms: NormSet, power: float, q: float, two_star: float) -> float:
    if math.isclose(power, two_star, rel_tol=1e-12):
        return norms.lcrit
    if math.isclose(power, q, rel_tol=1e-12):
        return norms.lq
    raise DomainError(f"No norm for power {power}; expected q={q} or 2*={two_star}")


def _weighted_terms(norms: NormSet, coeffs: RadialCoefficients, dim: int, q: float):
    two_star = critical_exponent(dim)
    mass_term = coeffs.mass * norms.l2_sq if coeffs.mass != 0.0 else 0.0
    powers = [(p, b * _power_norm(norms, p, q, two_star)) for p, b in coeffs.terms if b != 0.0]
    return two_star, mass_term, powers


def energy_from_norms(norms: NormSet, coeffs: RadialCoefficients, dim: int, q: float) -> float:
    _, mass_term, powers = _weighted_terms(norms, coeffs, dim, q)
    return 0.5 * norms.grad_sq + 0.5 * mass_term - sum(value / p for p, value in powers)


def _normalized(terms: list[float]) -> float:
    scale = max((abs(t) for t in terms), default=0.0)
    if scale == 0.0:
        return 0.0
    return sum(terms) / scale


def identity_defects(norms: NormSet, coeffs: RadialCoefficients, dim: int, q: float) -> tuple[float, float]:
    """Signed (Nehari, Pohozaev) defects, each normalized by its largest term.

    Nehari:   A + a‖u‖₂² − Σ b_k‖u‖_{p_k}^{p_k}
    Pohozaev: A/2* + (a/2)‖u‖₂² − Σ (b_k/p_k)‖u‖_{p_k}^{p_k}
    """
    two_star, mass_term, powers = _weighted_terms(norms, coeffs, dim, q)
    nehari = [norms.grad_sq, mass_term] + [-value for _, value in powers]
    pohozaev = [norms.grad_sq / two_star, 0.5 * mass_term] + [-value / p for p, value in powers]
    return _normalized(nehari), _normalized(pohozaev)


def l2_balance_defect(norms: NormSet, coeffs: RadialCoefficients, dim: int, q: float) -> float:
    """Signed defect of a‖u‖₂² = Σ b_k (N/p_k − (N−2)/2) ‖u‖_{p_k}^{p_k}.

    Pohozaev minus (N−2)/2 times Nehari; the critical power drops out, so the
    L² mass is tested against the subcritical terms alone.
    """
    two_star, mass_term, powers = _weighted_terms(norms, coeffs, dim, q)
    terms = [mass_term]
    for power, value in powers:
        if not math.isclose(power, two_star, rel_tol=1e-12):
            terms.append(-(dim / power - (dim - 2) / 2.0) * value)
    return _normalized(terms)


def energy(profile: RadialProfile, params: ProblemParams, form: EnergyForm) -> float:
    norms = radial_norms(profile, params.q_float)
    return energy_from_norms(norms, form.coefficients(params), profile.dim, params.q_float)


def nehari_residual(profile: RadialProfile, params: ProblemParams, form: EnergyForm) -> float:
    norms = radial_norms(profile, params.q_float)
    return identity_defects(norms, form.coefficients(params), profile.dim, params.q_float)[0]


def pohozaev_residual(profile: RadialProfile, params: ProblemParams, form: EnergyForm) -> float:
    norms = radial_norms(profile, params.q_float)
    return identity_defects(norms, form.coefficients(params), profile.dim, params.q_float)[1]


def tau_ratio(profile: RadialProfile) -> float:
    """τ = ‖∇u‖₂² / ‖u‖_{2*}^{2*}."""
    crit = lebesgue_integral(profile, critical_exponent(profile.dim))
    if crit == 0.0:
        raise DegenerateProfileError("tau is undefined for a profile with vanishing L^{2*} norm")
    return gradient_integral(profile) / crit


# ── L²–L^q identity ─────────────────────────────────────────────────


class IdentityForm(Enum):
    V = "v_form"
    W = "w_form"


def l2_lq_defect_from_norms(
    norms: NormSet, params: ProblemParams, which: IdentityForm = IdentityForm.V, xi: float | None = None
) -> float:
    exps = derive_exponents(params)
    left = norms.l2_sq
    if which is IdentityForm.W:
        if xi is None or xi <= 0.0:
            raise DomainError(f"The w-form identity requires xi > 0, got {xi}")
        left = xi ** ((params.q_float - 2.0) * exps.s) * norms.l2_sq
    right = exps.l2_lq_ratio * norms.lq
    return _normalized([left, -right])


def l2_lq_identity_defect(
    profile: RadialProfile, params: ProblemParams, which: IdentityForm = IdentityForm.V, xi: float | None = None
) -> float:
    return l2_lq_defect_from_norms(radial_norms(profile, params.q_float), params, which, xi)


# ── Ground-state level relations ────────────────────────────────────


def energy_triple(norms_v: NormSet, params: ProblemParams) -> tuple[float, float, float]:
    """(J_λ(v), A/N, C/N + λ^σ((q−2)/(2q))B), equal on a ground state of (Q_λ)."""
    q = params.q_float
    weight = params.lam ** derive_exponents(params).sigma
    level = energy_from_norms(norms_v, EnergyForm.rescaled().coefficients(params), params.dim, q)
    return (
        level,
        norms_v.grad_sq / params.dim,
        norms_v.lcrit / params.dim + weight * (q - 2.0) / (2.0 * q) * norms_v.lq,
    )


def l2_upper_bound(norms_v: NormSet, params: ProblemParams) -> float:
    """(2(2*−q)/(q(2*−2)))^{(2*−2)/(q−2)} (A/S)^{2*/2}, an upper bound for ‖v_λ‖₂²."""
    exps = derive_exponents(params)
    return exps.l2_lq_ratio**exps.sigma * (norms_v.grad_sq / sobolev_constant(params.dim)) ** (exps.two_star / 2.0)


# ── Pointwise ODE residual ──────────────────────────────────────────


def ode_residual(profile: RadialProfile, coeffs: RadialCoefficients | None = None) -> float:
    """Sup of the finite-difference residual of the radial ODE at interior grid points.

    Written in t = ln r with w = r u′:  dw/dt + (N−2)w − r² f(u) = 0. The result is
    normalized by the largest nonlinear term on the grid.
    """
    coeffs = coeffs or profile.coeffs
    if profile.grid.size < 5:
        raise DomainError("ode_residual needs at least 5 grid points")
    r = profile.grid[1:]
    u = profile.values[1:]
    w = r * profile.derivs[1:]
    scale = float(np.max(coeffs.nonlinear_magnitude(profile.values)))
    if scale == 0.0:
        return 0.0
    t = np.log(r)
    dw = np.gradient(w, t, edge_order=2)
    residual = (dw + (profile.dim - 2) * w) / (r * r) - coeffs.source(u)
    return float(np.max(np.abs(residual[1:-1]))) / scale
