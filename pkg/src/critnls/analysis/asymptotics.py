"""Rescalings of the ground states, concentration scale, λ-sweeps and decay envelopes.

Conventions:
    v(x) = λ^{1/(q−2)} u(λ^{σ/2} x)      solves (Q_λ)
    w(x) = ξ^{(N−2)/2} v(ξ x)            solves (R_λ)
The sweep stores ξ in the u-convention, w(x) = ξ_u^{(N−2)/2} u(ξ_u x), i.e.
ξ_u = λ^{σ/2} ξ_v, the scale whose λ-rates the small-λ theory states.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from critnls.analysis.functionals import EnergyForm, energy_from_norms, radial_norms
from critnls.core.norms import NormSet
from critnls.core.params import Exponent, ProblemParams, derive_exponents, exponents_for, gq_constants
from critnls.core.talenti import TalentiBubble, g0_at_rho0_closed_form, m0_closed_form
from critnls.errors import (
    CritNLSError,
    DivergentNormError,
    DomainError,
    EnvelopeViolation,
    InsufficientDecades,
    NotConcentratedError,
    RescaleError,
)
from critnls.solver.profile import RadialProfile
from critnls.solver.shooting import SolverSettings, solve_ground_state

logger = logging.getLogger(__name__)

STATUS_OK = "ok"


# ── Rescalings ──────────────────────────────────────────────────────


def rescale_v(u: RadialProfile, params: ProblemParams) -> RadialProfile:
    if params.lam <= 0.0:
        raise RescaleError("The (Q_lambda) rescaling needs lambda > 0")
    exps = derive_exponents(params)
    return u.rescaled(params.lam ** (1.0 / (params.q_float - 2.0)), params.lam ** (exps.sigma / 2.0))


def rescale_w(v: RadialProfile, xi: float) -> RadialProfile:
    if not xi > 0.0:
        raise RescaleError(f"The concentration rescaling needs xi > 0, got {xi}")
    return v.rescaled(xi ** ((v.dim - 2) / 2.0), xi)


def extract_xi(v: RadialProfile, dim: int | None = None) -> float:
    """ξ with rescale_w(v, ξ)(0) = U₁(0)."""
    dim = dim or v.dim
    peak = TalentiBubble(dim).peak
    if v.center_value <= peak:
        raise NotConcentratedError(
            f"v(0)={v.center_value:.6g} does not exceed U_1(0)={peak:.6g}; lambda is not small enough"
        )
    return (peak / v.center_value) ** (2.0 / (dim - 2))


def v_norms_from_u(norms_u: NormSet, params: ProblemParams) -> NormSet:
    sigma = derive_exponents(params).sigma
    return norms_u.scaled(l2=params.lam ** (-sigma), lq=params.lam ** (1.0 - sigma))


def w_norms_from_v(norms_v: NormSet, params: ProblemParams, xi: float) -> NormSet:
    exps = derive_exponents(params)
    return norms_v.scaled(
        l2=xi ** (-(exps.two_star - 2.0) * exps.s),
        lq=xi ** (-(exps.two_star - params.q_float) * exps.s),
    )


def xi_u_from_v(xi_v: float, params: ProblemParams) -> float:
    return params.lam ** (derive_exponents(params).sigma / 2.0) * xi_v


# ── Energy bounds ───────────────────────────────────────────────────


def tau_upper_bound(dim: int, q: Exponent, lam: float) -> float:
    """1 + G(q)λ^σ."""
    _, big_g = gq_constants(dim, q)
    return 1.0 + big_g * lam ** exponents_for(dim, q).sigma


def energy_lower_bound(dim: int, q: Exponent, lam: float) -> float:
    """m₀(1 − λ^σ N G(q)(1 + G(q)λ^σ)^{(N−2)/2})."""
    _, big_g = gq_constants(dim, q)
    weight = lam ** exponents_for(dim, q).sigma
    return m0_closed_form(dim) * (1.0 - weight * dim * big_g * (1.0 + big_g * weight) ** ((dim - 2) / 2.0))


def energy_upper_bound(dim: int, q: Exponent, lam: float) -> float:
    """m₀ − λ^σ{g₀(ρ₀) − λ^σ(2N m₀/(q−2))G(q)²}, valid for N ≥ 5 and small λ."""
    if dim <= 4:
        raise DivergentNormError("The bubble-based upper energy bound needs N >= 5")
    _, big_g = gq_constants(dim, q)
    m0 = m0_closed_form(dim)
    weight = lam ** exponents_for(dim, q).sigma
    gain = g0_at_rho0_closed_form(dim, q) - weight * 2.0 * dim * m0 / (float(q) - 2.0) * big_g**2
    return m0 - weight * gain


def lq_upper_bound(dim: int, q: Exponent) -> float:
    """(2q/(2*−2)) Q(q) m₀, a bound for ‖v_λ‖_q^q at small λ when N ≥ 5."""
    big_q, _ = gq_constants(dim, q)
    return 2.0 * float(q) / (exponents_for(dim, q).two_star - 2.0) * big_q * m0_closed_form(dim)


# ── Sweeps ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    mu0: float = math.nan
    norms_u: NormSet | None = None
    norms_v: NormSet | None = None
    norms_w: NormSet | None = None
    m_lambda: float = math.nan
    delta: float = math.nan
    tau: float = math.nan
    xi: float = math.nan
    status: str = STATUS_OK
    flags: tuple[str, ...] = field(default=())
    # problem the record was solved for; None for records read back from a sweep CSV
    dim: int | None = None
    q: float | None = None

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def lambda_grid(lo: float, hi: float, points_per_decade: int) -> list[float]:
    if not 0.0 < lo < hi:
        raise DomainError(f"Lambda window must satisfy 0 < lo < hi, got {lo}:{hi}")
    count = int(round(math.log10(hi / lo) * points_per_decade)) + 1
    return [float(x) for x in np.logspace(math.log10(lo), math.log10(hi), max(count, 2))]


def validate_grid(lambdas: list[float], min_decades: float = 2.0, min_per_decade: float = 8.0) -> None:
    decades = math.log10(max(lambdas) / min(lambdas))
    if decades < min_decades:
        raise InsufficientDecades(f"Sweep spans {decades:.2f} decades; at least {min_decades:g} required")
    if (len(lambdas) - 1) / decades < min_per_decade - 1e-9:
        raise DomainError(f"Sweep needs at least {min_per_decade:g} points per decade")


def sweep_point(params: ProblemParams, tol: float, settings: SolverSettings | None = None) -> SweepRecord:
    q = params.q_float
    try:
        result = solve_ground_state(params, tol, settings, allow_unproven=True)
    except CritNLSError as exc:
        logger.warning("Sweep point lambda=%g failed: %s: %s", params.lam, type(exc).__name__, exc)
        return SweepRecord(params.lam, status=type(exc).__name__, dim=params.dim, q=q)

    u = result.profile
    norms_u = radial_norms(u, q)
    v = rescale_v(u, params)
    norms_v = radial_norms(v, q)
    m_lambda = energy_from_norms(norms_u, EnergyForm.original().coefficients(params), params.dim, q)

    norms_w = None
    xi = math.nan
    try:
        xi_v = extract_xi(v)
        norms_w = radial_norms(rescale_w(v, xi_v), q)
        xi = xi_u_from_v(xi_v, params)
    except NotConcentratedError:
        logger.debug("lambda=%g: v(0) below U_1(0), no concentration scale", params.lam)

    return SweepRecord(
        lam=params.lam,
        mu0=result.mu0,
        norms_u=norms_u,
        norms_v=norms_v,
        norms_w=norms_w,
        m_lambda=m_lambda,
        delta=m0_closed_form(params.dim) - m_lambda,
        tau=norms_v.grad_sq / norms_v.lcrit,
        xi=xi,
        flags=result.flags,
        dim=params.dim,
        q=q,
    )


def _sweep_task(args: tuple[ProblemParams, float, SolverSettings | None]) -> SweepRecord:
    return sweep_point(*args)


def run_sweep(
    dim: int,
    q: Exponent,
    lambdas: list[float],
    tol: float = 1e-8,
    jobs: int = 1,
    settings: SolverSettings | None = None,
    check_grid: bool = True,
) -> list[SweepRecord]:
    """One record per λ, sorted by λ; failed points carry the error name as status."""
    lambdas = sorted(float(lam) for lam in lambdas)
    if check_grid:
        validate_grid(lambdas)
    tasks = [(ProblemParams(dim, q, lam), tol, settings) for lam in lambdas]
    logger.info("Sweeping N=%d q=%s over %d points (jobs=%d)", dim, q, len(tasks), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_sweep_task, tasks))
    else:
        records = [_sweep_task(task) for task in tasks]
    failed = sum(not record.ok for record in records)
    if failed:
        logger.warning("%d of %d sweep points failed", failed, len(records))
    return sorted(records, key=lambda record: record.lam)


# ── Decay envelopes ─────────────────────────────────────────────────


@dataclass(frozen=True)
class EnvelopeReport:
    c_up: float
    c_low: float
    kappa: float
    radii: tuple[float, float]

    @property
    def ratio(self) -> float:
        return self.c_up / self.c_low

    def as_dict(self) -> dict[str, float | list[float]]:
        return {
            "c_up": self.c_up,
            "c_low": self.c_low,
            "ratio": self.ratio,
            "kappa": self.kappa,
            "radii": list(self.radii),
        }


def decay_envelope_check(
    w: RadialProfile, params: ProblemParams, xi: float, outer: float | None = None
) -> EnvelopeReport:
    """Constants with c_low r^{−(N−2)} e^{−κr} ≤ w(r) ≤ C_up (1+r)^{−(N−2)} on [1, outer].

    κ = λ^{σ/2} ξ^{(2*−2)s/2} is the decay rate of w; ``xi`` is the v-convention scale.
    """
    if not xi > 0.0:
        raise RescaleError(f"Envelope check needs xi > 0, got {xi}")
    exps = derive_exponents(params)
    kappa = params.lam ** (exps.sigma / 2.0) * xi ** ((exps.two_star - 2.0) * exps.s / 2.0) if params.lam > 0 else 0.0
    if outer is None:
        outer = 20.0 / kappa if kappa > 0.0 else w.outer_radius
    if outer <= 1.0:
        raise DomainError(f"Envelope range [1, {outer:g}] is empty")

    inside = w.grid[(w.grid >= 1.0) & (w.grid <= outer)]
    beyond = np.geomspace(max(w.outer_radius, 1.0), outer, 200) if outer > w.outer_radius else np.empty(0)
    radii = np.unique(np.concatenate((inside, beyond)))
    values = w.evaluate(radii)
    power = w.dim - 2
    c_up = float(np.max(values * (1.0 + radii) ** power))
    c_low = float(np.min(values * radii**power * np.exp(kappa * radii)))
    if not (math.isfinite(c_up) and math.isfinite(c_low)) or c_low <= 0.0:
        raise EnvelopeViolation(f"No finite envelope constants on [1, {outer:g}] (c_low={c_low}, c_up={c_up})")
    return EnvelopeReport(c_up, c_low, kappa, (1.0, float(outer)))


def envelope_spread(reports: list[EnvelopeReport]) -> dict[str, float]:
    """How far the envelope constants move across a sweep."""
    if not reports:
        raise DomainError("No envelope reports to summarize")
    ups = [r.c_up for r in reports]
    lows = [r.c_low for r in reports]
    return {
        "c_up_min": min(ups),
        "c_up_max": max(ups),
        "c_low_min": min(lows),
        "c_low_max": max(lows),
        "max_ratio": max(r.ratio for r in reports),
    }
