"""Mass-constrained critical points and the ρ ↔ λ map.

A critical point v of J on {‖v‖₂ = ρ} solves −Δv + ω v = v^{2*−1} + v^{q−1}.
With  λ = ω^{−(N−2)(2*−q)/4},  v(x) = ω^{(N−2)/4} u(√ω x)  it becomes the
unconstrained problem for u = u_λ. Writing A = ‖∇v‖₂², B = ‖v‖_q^q and
C = ‖v‖_{2*}^{2*}, the energy, Nehari and Pohozaev identities read

    A/2 − B/q − C/2*             = m_ρ
    A − B − C                    = −ω ρ²
    (N−2)A/2 − N B/q − N C/2*    = −(N/2) ω ρ²

a linear system in (C, ω ρ², m_ρ) that is singular only at q = 2*.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from critnls.analysis.functionals import radial_norms
from critnls.analysis.lambertw import lambert_w0
from critnls.core.norms import NormSet
from critnls.core.params import GUARD_BAND, Exponent, ProblemParams, exponents_for
from critnls.errors import DomainError
from critnls.solver.shooting import ShootingResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MassPoint:
    rho: float
    omega: float
    m_rho: float
    lam: float

    def as_dict(self) -> dict[str, float]:
        return {"rho": self.rho, "omega": self.omega, "m_rho": self.m_rho, "lambda": self.lam}


def mass_constant(dim: int, q: Exponent) -> float:
    """c = (N−2)(2*−q)/(2q), so that ρ²ω = c·B."""
    two_star = exponents_for(dim, q).two_star
    return (dim - 2) * (two_star - float(q)) / (2.0 * float(q))


def omega_of_lambda(dim: int, q: Exponent, lam: float) -> float:
    two_star = exponents_for(dim, q).two_star
    return lam ** (-4.0 / ((dim - 2) * (two_star - float(q))))


def lambda_of_omega(dim: int, q: Exponent, omega: float) -> float:
    two_star = exponents_for(dim, q).two_star
    return omega ** (-(dim - 2) * (two_star - float(q)) / 4.0)


# ── Nehari–Pohozaev system ──────────────────────────────────────────


def solve_mass_identities(A: float, B: float, rho: float, dim: int, q: float) -> tuple[float, float, float]:
    """(ω, m_ρ, C) from the three identities given A, B and ρ."""
    if min(A, B, rho) <= 0.0:
        raise DomainError(f"Mass identities require A, B, rho > 0, got A={A}, B={B}, rho={rho}")
    two_star = 2.0 * dim / (dim - 2)
    qf = float(q)
    if not 2.0 < qf < two_star or two_star - qf < GUARD_BAND:
        raise DomainError(f"Mass identities require 2 < q < 2* = {two_star:g}; the system is singular at q = 2*")
    omega = mass_constant(dim, qf) * B / rho**2
    m_rho = A / dim - 0.5 * dim * (1.0 / qf - 1.0 / two_star) * B
    C = A - dim * (0.5 - 1.0 / qf) * B
    return omega, m_rho, C


def mass_system_residuals(
    A: float, B: float, C: float, omega: float, m_rho: float, rho: float, dim: int, q: float
) -> tuple[float, float, float]:
    """Relative residuals of the energy, Nehari and Pohozaev rows."""
    two_star = 2.0 * dim / (dim - 2)
    qf = float(q)
    load = omega * rho**2
    rows = (
        (A / 2.0, -B / qf, -C / two_star, -m_rho),
        (A, -B, -C, load),
        ((dim - 2) / 2.0 * A, -dim * B / qf, -dim * C / two_star, dim / 2.0 * load),
    )
    return tuple(abs(sum(row)) / max(abs(term) for term in row) for row in rows)


# ── Exact map from solved ground states ─────────────────────────────


def mass_point_from_norms(norms_u: NormSet, params: ProblemParams) -> MassPoint:
    """ρ² = c·λ^{1+4/((N−2)(2*−q))}‖u_λ‖_q^q, with m_ρ from the identities."""
    dim, q, lam = params.dim, params.q_float, params.lam
    if lam <= 0.0:
        raise DomainError("The mass map needs lambda > 0")
    omega = omega_of_lambda(dim, params.q, lam)
    # B_v = λ B_u, A_v = A_u under the frequency rescaling
    big_b = lam * norms_u.lq
    rho = math.sqrt(mass_constant(dim, params.q) * big_b / omega)
    _, m_rho, _ = solve_mass_identities(norms_u.grad_sq, big_b, rho, dim, q)
    return MassPoint(rho, omega, m_rho, lam)


def rho_of_lambda(params: ProblemParams, solved: ShootingResult) -> MassPoint:
    return mass_point_from_norms(radial_norms(solved.profile, params.q_float), params)


@dataclass(frozen=True)
class MassCrossCheck:
    point: MassPoint
    omega_exact: float
    omega_identity: float

    @property
    def relative_gap(self) -> float:
        return abs(self.omega_identity / self.omega_exact - 1.0)

    def as_dict(self) -> dict[str, float | dict[str, float]]:
        return {
            "point": self.point.as_dict(),
            "omega_exact": self.omega_exact,
            "omega_identity": self.omega_identity,
            "relative_gap": self.relative_gap,
        }


def mass_point_from_profile(params: ProblemParams, solved: ShootingResult) -> MassCrossCheck:
    """Recover ω from the identities using the measured mass of the rescaled profile.

    Agreement with λ^{−4/((N−2)(2*−q))} tests the identities, not the formula.
    """
    norms_u = radial_norms(solved.profile, params.q_float)
    omega = omega_of_lambda(params.dim, params.q, params.lam)
    rho = math.sqrt(norms_u.l2_sq / omega)
    omega_identity, m_rho, _ = solve_mass_identities(
        norms_u.grad_sq, params.lam * norms_u.lq, rho, params.dim, params.q_float
    )
    logger.info("Mass cross-check lambda=%g: omega=%.12g, identity omega=%.12g", params.lam, omega, omega_identity)
    return MassCrossCheck(MassPoint(rho, omega_identity, m_rho, params.lam), omega, omega_identity)


# ── Asymptotic model ────────────────────────────────────────────────


def rho_rate(dim: int, q: Exponent) -> tuple[float, float]:
    """(a, β) with ρ ∼ λ^a (ln 1/λ)^β as λ → 0."""
    qf = float(q)
    if dim >= 5:
        two_star = exponents_for(dim, q).two_star
        return 8.0 / ((dim - 2) ** 2 * (qf - 2.0) * (two_star - qf)), 0.0
    if dim == 4:
        return 2.0 / ((qf - 2.0) * (4.0 - qf)), -(4.0 - qf) / (2.0 * (qf - 2.0))
    _check_three_dim_branch(dim, qf)
    return (qf - 2.0) / ((qf - 4.0) * (6.0 - qf)), 0.0


def _check_three_dim_branch(dim: int, q: float) -> None:
    exponents_for(dim, q)
    if q <= 4.0:
        raise DomainError(f"The N=3 mass asymptotics require q > 4, got q={q}")


def lambda_of_rho_model(rho: float, dim: int, q: Exponent, prefactor: float = 1.0) -> float:
    if rho <= 0.0:
        raise DomainError(f"lambda_of_rho_model requires rho > 0, got {rho}")
    if prefactor <= 0.0:
        raise DomainError(f"lambda_of_rho_model requires a positive prefactor, got {prefactor}")
    qf = float(q)
    if dim >= 5:
        two_star = exponents_for(dim, q).two_star
        return prefactor * rho ** ((dim - 2) ** 2 * (qf - 2.0) * (two_star - qf) / 8.0)
    if dim == 4:
        exponents_for(dim, q)
        argument = 4.0 / (4.0 - qf) ** 2 * rho ** (-2.0 * (qf - 2.0) / (4.0 - qf))
        return prefactor * rho ** ((qf - 2.0) * (4.0 - qf) / 2.0) * lambert_w0(argument) ** ((4.0 - qf) ** 2 / 4.0)
    _check_three_dim_branch(dim, qf)
    return prefactor * rho ** ((qf - 4.0) * (6.0 - qf) / (qf - 2.0))


def calibrate_prefactor(point: MassPoint, dim: int, q: Exponent) -> float:
    """Model prefactor that reproduces ``point`` exactly."""
    return point.lam / lambda_of_rho_model(point.rho, dim, q, 1.0)


def mass_table(points: list[MassPoint], dim: int, q: Exponent, prefactor: float) -> list[dict[str, float]]:
    """Rows of (ρ, ω, m_ρ, λ, λ_model) sorted by ρ."""
    rows = [
        {
            "rho": p.rho,
            "omega": p.omega,
            "m_rho": p.m_rho,
            "lambda": p.lam,
            "lambda_model": lambda_of_rho_model(p.rho, dim, q, prefactor),
        }
        for p in points
    ]
    return sorted(rows, key=lambda row: row["rho"])
