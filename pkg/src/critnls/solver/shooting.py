"""Shooting solver for positive, decaying radial solutions.

A trajectory starts from a Taylor expansion at r = r₀ ≪ ℓ (ℓ the natural
length of the height), is integrated in t = ln r for y = (u, r·u′), and is
classified as an overshoot (u crosses zero) or an undershoot (u′ turns
positive).  Bisection on u(0) narrows the bracket to a few ulps; the final
profile combines the two bracketing shots so that the exponentially growing
mode cancels at the stitch radius, beyond which the decaying solution of the
linearized equation, c·r^{−ν}K_ν(κr), takes over.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import kve

from critnls.core.params import (
    Existence,
    Exponent,
    ProblemParams,
    derive_exponents,
    existence_region,
)
from critnls.analysis.functionals import (
    energy_from_norms,
    identity_defects,
    l2_balance_defect,
    ode_residual,
    radial_norms,
)
from critnls.core.talenti import m0_closed_form
from critnls.errors import DomainError, NoDecayingSolution, ToleranceNotReached
from critnls.solver.profile import (
    RadialCoefficients,
    RadialProfile,
    TailKind,
    TailModel,
    direct_coefficients,
    soliton_coefficients,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-12
    atol_factor: float = 1e-20
    # r₀ = start_factor · ℓ, R_max = reach / √a
    start_factor: float = 1e-6
    reach: float = 60.0
    points_per_decade: int = 400
    tail_threshold: float = 1e-10
    # the Bessel tail is attached only where κr ≥ min_stitch_kr
    min_stitch_kr: float = 1.0
    bracket_tol: float = 1e-15
    bracket_growth: float = 2.0
    height_span: float = 1e12
    max_bisection: int = 200
    ode_tol: float = 1e-3
    l2_identity_tol: float = 1e-6
    method: str = "DOP853"


class ShotOutcome(Enum):
    OVERSHOOT = "overshoot"
    UNDERSHOOT = "undershoot"


class Frame(Enum):
    """Scaling in which the ODE is integrated; see ``solve_ground_state``."""

    RESCALED = "rescaled"
    LARGE_LAMBDA = "large_lambda"
    SOLITON = "soliton"


@dataclass(frozen=True)
class ResidualReport:
    nehari: float
    pohozaev: float
    ode_sup: float
    l2_identity: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "nehari": self.nehari,
            "pohozaev": self.pohozaev,
            "ode_sup": self.ode_sup,
            "l2_identity": self.l2_identity,
        }


@dataclass(frozen=True, eq=False)
class ShootingResult:
    profile: RadialProfile
    mu0: float
    bisection_iterations: int
    bracket_width: float
    residual_report: ResidualReport
    frame: Frame
    flags: tuple[str, ...] = ()


@dataclass
class _Shot:
    height: float
    outcome: ShotOutcome
    solution: object | None
    t_end: float


# ── Single trajectory ───────────────────────────────────────────────


def _span(coeffs: RadialCoefficients, height: float, settings: SolverSettings) -> tuple[float, float]:
    ell = coeffs.length_scale(height)
    start = settings.start_factor * ell
    stop = max(settings.reach / math.sqrt(coeffs.mass), 1e3 * ell)
    return start, stop


def _taylor_start(coeffs: RadialCoefficients, dim: int, height: float, radius: float) -> tuple[float, float]:
    f0 = float(coeffs.source(height))
    f1 = float(coeffs.source_prime(height))
    f2 = float(coeffs.source_second(height))
    c2 = f0 / (2.0 * dim)
    c4 = f1 * c2 / (4.0 * (dim + 2))
    c6 = (f1 * c4 + 0.5 * f2 * c2 * c2) / (6.0 * (dim + 4))
    r2 = radius * radius
    value = height + r2 * (c2 + r2 * (c4 + r2 * c6))
    # r·u′
    slope = r2 * (2.0 * c2 + r2 * (4.0 * c4 + r2 * 6.0 * c6))
    return value, slope


def _shoot(
    coeffs: RadialCoefficients,
    dim: int,
    height: float,
    span: tuple[float, float],
    settings: SolverSettings,
    dense: bool = False,
) -> _Shot:
    start, stop = span
    if float(coeffs.source(height)) >= 0.0:
        # u″(0) ≥ 0: the trajectory rises from the start
        return _Shot(height, ShotOutcome.UNDERSHOOT, None, math.log(start))

    mass = coeffs.mass
    terms = tuple(coeffs.terms)
    shift = dim - 2

    def rhs(t, y):
        u, w = y
        f = mass * u
        for power, coeff in terms:
            f -= coeff * abs(u) ** (power - 2.0) * u
        return (w, -shift * w + math.exp(2.0 * t) * f)

    def crossed_zero(t, y):
        return y[0]

    def turned_up(t, y):
        return y[1]

    crossed_zero.terminal = True
    crossed_zero.direction = -1
    turned_up.terminal = True
    turned_up.direction = 1

    y0 = _taylor_start(coeffs, dim, height, start)
    sol = solve_ivp(
        rhs,
        (math.log(start), math.log(stop)),
        y0,
        method=settings.method,
        rtol=settings.rtol,
        atol=settings.atol_factor * height,
        events=(crossed_zero, turned_up),
        dense_output=dense,
    )
    if sol.status == -1:
        raise ToleranceNotReached(f"Integration failed at height {height!r}: {sol.message}")

    t_end = float(sol.t[-1])
    if sol.t_events[0].size:
        outcome = ShotOutcome.OVERSHOOT
    elif sol.t_events[1].size:
        outcome = ShotOutcome.UNDERSHOOT
    else:
        # reached R_max: the sign of κu + u′ tells the growing mode's sign
        u, w = sol.y[:, -1]
        indicator = math.sqrt(mass) * u + w / math.exp(t_end)
        outcome = ShotOutcome.UNDERSHOOT if indicator > 0.0 else ShotOutcome.OVERSHOOT
    return _Shot(height, outcome, sol.sol if dense else None, t_end)


def classify_shot(
    coeffs: RadialCoefficients, dim: int, height: float, settings: SolverSettings | None = None
) -> ShotOutcome:
    settings = settings or SolverSettings()
    if coeffs.mass <= 0.0:
        raise DomainError("Shooting needs a positive mass coefficient")
    return _shoot(coeffs, dim, height, _span(coeffs, height, settings), settings).outcome


# ── Bracketing and bisection ────────────────────────────────────────


def _bracket(coeffs: RadialCoefficients, dim: int, seed: float, settings: SolverSettings) -> tuple[float, float]:
    growth = settings.bracket_growth
    ceiling = seed * settings.height_span
    floor = seed / settings.height_span

    hi = seed
    lo = None
    while classify_shot(coeffs, dim, hi, settings) is ShotOutcome.UNDERSHOOT:
        lo = hi
        hi *= growth
        if hi > ceiling:
            raise NoDecayingSolution(
                f"Every height up to {ceiling:.3g} undershoots; no positive decaying solution found"
            )
    if lo is None:
        lo = hi / growth
        while classify_shot(coeffs, dim, lo, settings) is ShotOutcome.OVERSHOOT:
            hi = lo
            lo /= growth
            if lo < floor:
                raise NoDecayingSolution(
                    f"Every height down to {floor:.3g} overshoots; no positive decaying solution found"
                )
    logger.debug("Bracket [%r, %r]", lo, hi)
    return lo, hi


def _bisect(
    coeffs: RadialCoefficients, dim: int, lo: float, hi: float, settings: SolverSettings
) -> tuple[float, float, int]:
    iterations = 0
    while hi - lo > settings.bracket_tol * hi:
        if iterations >= settings.max_bisection:
            raise ToleranceNotReached(
                f"Bisection stopped after {iterations} iterations with bracket width {hi - lo:.3e}"
            )
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if classify_shot(coeffs, dim, mid, settings) is ShotOutcome.OVERSHOOT:
            hi = mid
        else:
            lo = mid
        iterations += 1
    return lo, hi, iterations


# ── Profile assembly ────────────────────────────────────────────────


def _bessel_log_derivative(nu: float, kappa: float, radius: float) -> float:
    z = kappa * radius
    return -kappa * kve(nu + 1.0, z) / kve(nu, z)


def _assemble(
    coeffs: RadialCoefficients, dim: int, lo: float, hi: float, settings: SolverSettings
) -> RadialProfile:
    span = _span(coeffs, hi, settings)
    low = _shoot(coeffs, dim, lo, span, settings, dense=True)
    high = _shoot(coeffs, dim, hi, span, settings, dense=True)
    if low.solution is None or high.solution is None:
        raise ToleranceNotReached("Bracketing shots ended before integration started")

    t_start = math.log(span[0])
    t_stop = min(low.t_end, high.t_end)
    step = math.log(10.0) / settings.points_per_decade
    t = t_start + step * np.arange(int((t_stop - t_start) / step))
    if t.size < 10:
        raise ToleranceNotReached("Bracketing shots separate before the profile is resolved")
    y_lo = low.solution(t)
    y_hi = high.solution(t)

    valid = (y_lo[0] > 0.0) & (y_hi[0] > 0.0) & (y_lo[1] < 0.0) & (y_hi[1] < 0.0)
    last = int(np.argmin(valid)) - 1 if not valid.all() else t.size - 1
    last = max(last - 2, 0)
    kappa = math.sqrt(coeffs.mass)
    nu = (dim - 2) / 2.0
    kr = kappa * np.exp(t[: last + 1])
    # for κr ≪ 1 r^{−ν}K_ν(κr) ∼ r^{−(N−2)}, which a bare bubble matches as well
    if kr[-1] < settings.min_stitch_kr:
        raise NoDecayingSolution(
            f"Bracketing shots at height {hi!r} separate at kappa*r={kr[-1]:.3g}, "
            "before the exponential tail; the bracket encloses no decaying solution"
        )
    first = int(np.argmax(kr >= settings.min_stitch_kr))
    midline = 0.5 * (y_lo[0, first : last + 1] + y_hi[0, first : last + 1])
    below = np.nonzero(midline < settings.tail_threshold * hi)[0]
    stitch = first + int(below[0]) if below.size else last
    if stitch < 8:
        raise ToleranceNotReached("Bracketing shots separate before the profile is resolved")

    radius = math.exp(t[stitch])
    log_slope = _bessel_log_derivative(nu, kappa, radius)
    # growing-mode content of each shot, measured against the decaying log-derivative
    d_lo = y_lo[1, stitch] / radius - log_slope * y_lo[0, stitch]
    d_hi = y_hi[1, stitch] / radius - log_slope * y_hi[0, stitch]
    weight = d_hi / (d_hi - d_lo) if d_hi != d_lo else 0.5
    weight = min(max(weight, 0.0), 1.0)

    t = t[: stitch + 1]
    u = weight * y_lo[0, : stitch + 1] + (1.0 - weight) * y_hi[0, : stitch + 1]
    w = weight * y_lo[1, : stitch + 1] + (1.0 - weight) * y_hi[1, : stitch + 1]
    r = np.exp(t)
    du = w / r
    height = weight * lo + (1.0 - weight) * hi

    linear = coeffs.nonlinear_magnitude(u[-1]) <= 1.001 * coeffs.mass * u[-1]
    if not linear:
        logger.warning("Stitch radius %.4g is not in the linear regime; tail model is approximate", radius)

    grid = np.concatenate(([0.0], r))
    values = np.concatenate(([height], u))
    derivs = np.concatenate(([0.0], du))
    curvs = np.empty_like(grid)
    curvs[0] = float(coeffs.source(height)) / dim
    curvs[1:] = coeffs.source(u) - (dim - 1) * du / r

    edge_value = float(u[-1])
    amplitude = edge_value * radius**nu * math.exp(kappa * radius) / float(kve(nu, kappa * radius))
    tail = TailModel(amplitude, kappa, nu, TailKind.BESSEL)
    logger.debug(
        "Stitched at r=%.6g (u=%.3e, weight=%.6f, tail slope mismatch=%.2e)",
        radius,
        edge_value,
        weight,
        abs(du[-1] - float(tail.derivative(radius))) / abs(du[-1]),
    )
    return RadialProfile(dim, grid, values, derivs, curvs, tail, coeffs)


def _check_ground_state(profile: RadialProfile) -> None:
    values = profile.values
    if np.any(values <= 0.0):
        raise NoDecayingSolution("Shooting produced a profile with a sign change")
    if np.any(np.diff(values) > 1e-14 * values[0]):
        raise NoDecayingSolution("Shooting produced a non-monotone profile")


def shoot_profile(
    coeffs: RadialCoefficients,
    dim: int,
    seed: float = 1.0,
    settings: SolverSettings | None = None,
) -> tuple[RadialProfile, int, float]:
    """Minimal-height positive decaying solution for arbitrary coefficients (a > 0).

    Returns the profile, the number of bisection steps and the final bracket width.
    """
    settings = settings or SolverSettings()
    if coeffs.mass <= 0.0:
        raise DomainError("Shooting needs a positive mass coefficient")
    lo, hi = _bracket(coeffs, dim, seed, settings)
    lo, hi, iterations = _bisect(coeffs, dim, lo, hi, settings)
    profile = _assemble(coeffs, dim, lo, hi, settings)
    _check_ground_state(profile)
    return profile, iterations, hi - lo


def _certify(
    profile: RadialProfile, q: float, tol: float, settings: SolverSettings
) -> ResidualReport:
    norms = radial_norms(profile, q)
    nehari, pohozaev = identity_defects(norms, profile.coeffs, profile.dim, q)
    balance = l2_balance_defect(norms, profile.coeffs, profile.dim, q)
    report = ResidualReport(abs(nehari), abs(pohozaev), ode_residual(profile), abs(balance))
    if max(report.nehari, report.pohozaev) > tol:
        raise ToleranceNotReached(
            f"Identity residuals above tolerance {tol:.1e}: "
            f"nehari={report.nehari:.3e}, pohozaev={report.pohozaev:.3e}"
        )
    # the L² term barely weighs in the two sums above; a misplaced tail shows up here
    if report.l2_identity > settings.l2_identity_tol:
        raise ToleranceNotReached(
            f"L2 identity defect {report.l2_identity:.3e} above {settings.l2_identity_tol:.1e}"
        )
    if report.ode_sup > settings.ode_tol:
        raise ToleranceNotReached(f"ODE residual {report.ode_sup:.3e} above {settings.ode_tol:.1e}")
    return report


def _check_energy_gap(profile: RadialProfile, q: float, report: ResidualReport) -> float:
    """m₀ − m_λ, which is positive for every ground state; raises if it is lost in quadrature noise."""
    norms = radial_norms(profile, q)
    level = energy_from_norms(norms, profile.coeffs, profile.dim, q)
    m0 = m0_closed_form(profile.dim)
    gap = m0 - level
    noise = max(report.nehari, report.pohozaev) * m0
    if gap <= noise:
        raise NoDecayingSolution(
            f"Energy {level:.12g} is not below m0={m0:.12g} beyond the residual level {noise:.1e}; "
            "the profile is a detached bubble, not a ground state"
        )
    return gap


# ── Entry points ────────────────────────────────────────────────────


def solve_ground_state(
    params: ProblemParams,
    tol: float = 1e-8,
    settings: SolverSettings | None = None,
    allow_unproven: bool = False,
) -> ShootingResult:
    """Ground state u_λ of −Δu + u = u^{2*−1} + λu^{q−1}.

    For λ ≤ 1 the ODE is integrated for v = λ^{1/(q−2)}u(λ^{σ/2}·), which keeps
    u(0) and the core length O(1) as λ → 0; for λ > 1 for v = λ^{1/(q−2)}u,
    whose equation tends to −Δv + v = v^{q−1}.  The profile is mapped back to u.
    """
    settings = settings or SolverSettings()
    if params.lam <= 0.0:
        raise DomainError("solve_ground_state needs lambda > 0")
    flags: list[str] = []
    region = existence_region(params)
    if region is Existence.EXISTS_FOR_LARGE_LAMBDA:
        if not allow_unproven:
            raise DomainError(
                f"A ground state for N={params.dim}, q={params.q} is only known to exist for large lambda; "
                "pass allow_unproven=True to attempt the solve"
            )
        flags.append("existence_for_large_lambda_only")
        if params.q_float < 4.0:
            flags.append("two_positive_solutions_possible")
        logger.warning("Attempting N=%d q=%s lambda=%g outside the proven existence region",
                       params.dim, params.q, params.lam)

    exps = derive_exponents(params)
    amplitude = params.lam ** (1.0 / (params.q_float - 2.0))
    if params.lam <= 1.0:
        frame = Frame.RESCALED
        dilation = params.lam ** (exps.sigma / 2.0)
    else:
        frame = Frame.LARGE_LAMBDA
        dilation = 1.0

    direct = direct_coefficients(params)
    frame_coeffs = direct.rescaled(amplitude, dilation)
    profile, iterations, width = shoot_profile(frame_coeffs, params.dim, 1.0, settings)
    u_profile = replace(profile.rescaled(1.0 / amplitude, 1.0 / dilation), coeffs=direct)
    report = _certify(u_profile, params.q_float, tol, settings)
    _check_energy_gap(u_profile, params.q_float, report)

    logger.info(
        "Solved N=%d q=%s lambda=%g (%s frame): u(0)=%.12g, %d bisections, nehari=%.2e, pohozaev=%.2e",
        params.dim, params.q, params.lam, frame.value, u_profile.center_value,
        iterations, report.nehari, report.pohozaev,
    )
    return ShootingResult(
        profile=u_profile,
        mu0=u_profile.center_value,
        bisection_iterations=iterations,
        bracket_width=width / amplitude,
        residual_report=report,
        frame=frame,
        flags=tuple(flags),
    )


def solve_limit_soliton(
    dim: int, q: Exponent, tol: float = 1e-8, settings: SolverSettings | None = None
) -> ShootingResult:
    """Positive radial solution of −Δv + v = v^{q−1}."""
    settings = settings or SolverSettings()
    params = ProblemParams(dim, q, 0.0)
    coeffs = soliton_coefficients(params.q_float)
    profile, iterations, width = shoot_profile(coeffs, dim, 1.0, settings)
    report = _certify(profile, params.q_float, tol, settings)
    logger.info("Solved limit soliton N=%d q=%s: v(0)=%.12g", dim, q, profile.center_value)
    return ShootingResult(profile, profile.center_value, iterations, width, report, Frame.SOLITON)
