"""Verification reports for λ-sweeps.

Each branch turns sweep data into a ``CheckReport``: a list of named checks,
each either gated (decides ``passed``) or informational.  Every report can be
built from the sweep CSV columns alone; the rescaled norms are recovered
exactly from the u-norms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np

from critnls.analysis.asymptotics import (
    SweepRecord,
    decay_envelope_check,
    energy_lower_bound,
    energy_upper_bound,
    envelope_spread,
    extract_xi,
    lq_upper_bound,
    rescale_v,
    rescale_w,
    run_sweep,
    tau_upper_bound,
    v_norms_from_u,
)
from critnls.analysis.fitting import LogPowerMode, fit_power_law, half_window_gap
from critnls.analysis.functionals import (
    EnergyForm,
    energy_from_norms,
    energy_triple,
    l2_lq_defect_from_norms,
    l2_upper_bound,
    radial_norms,
)
from critnls.analysis.mass import (
    MassPoint,
    calibrate_prefactor,
    lambda_of_omega,
    lambda_of_rho_model,
    mass_point_from_norms,
    mass_system_residuals,
    rho_rate,
    solve_mass_identities,
)
from critnls.core.norms import NormSet
from critnls.core.params import Exponent, ProblemParams, critical_exponent, exponents_for
from critnls.core.talenti import TalentiBubble, m0_closed_form, rho0, sobolev_constant
from critnls.errors import CritNLSError, DomainError, FitError, InsufficientDecades
from critnls.solver.shooting import SolverSettings, solve_ground_state, solve_limit_soliton

logger = logging.getLogger(__name__)


class CheckBranch(Enum):
    THEOREM1 = "theorem1"
    THEOREM3 = "theorem3"
    COROLLARY = "corollary"
    ENVELOPE = "envelope"
    MASS = "mass"

    @classmethod
    def from_str(cls, value: str) -> "CheckBranch":
        for branch in cls:
            if branch.value == value.strip().lower():
                return branch
        valid = ", ".join(b.value for b in cls)
        raise ValueError(f"Unknown check branch '{value}'. Choose from: {valid}")


@dataclass(frozen=True)
class CheckSettings:
    exponent_tol: float = 0.05
    loose_exponent_tol: float = 0.1
    r_squared_floor: float = 0.99
    identity_tol: float = 1e-6
    prefactor_tol: float = 0.10
    peak_gap_tol: float = 0.05
    # absolute slack on the τ and m_λ sandwiches, measured relative to 1 and m₀
    sandwich_slack: float = 1e-9
    min_decades: float = 2.0
    min_decades_log: float = 3.0
    envelope_ratio_max: float = 1e3
    stability_gap: float = 0.1


@dataclass(frozen=True)
class ObservableCheck:
    name: str
    passed: bool
    gated: bool = True
    details: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "gated": self.gated, **self.details}


@dataclass(frozen=True)
class CheckReport:
    branch: CheckBranch
    dim: int
    q: float
    checks: tuple[ObservableCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.gated)

    def failing(self) -> list[str]:
        return [check.name for check in self.checks if check.gated and not check.passed]

    def check(self, name: str) -> ObservableCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "branch": self.branch.value,
            "dim": self.dim,
            "q": self.q,
            "passed": self.passed,
            "failing": self.failing(),
            "checks": [check.as_dict() for check in self.checks],
        }


def _log_verdict(report: CheckReport) -> CheckReport:
    if report.passed:
        logger.info("%s N=%d q=%g: pass (%d checks)", report.branch.value, report.dim, report.q, len(report.checks))
    else:
        logger.info("%s N=%d q=%g: FAIL %s", report.branch.value, report.dim, report.q, ", ".join(report.failing()))
    return report


# ── Shared helpers ──────────────────────────────────────────────────


def _check_problem(record: SweepRecord, dim: int, q: Exponent) -> None:
    """Raise if the record was solved for another (N, q) than the one being checked."""
    qf = float(q)
    if record.dim is not None and record.dim != dim:
        raise DomainError(f"Record at lambda={record.lam:g} was solved for N={record.dim}, checked as N={dim}")
    if record.q is not None and not math.isclose(record.q, qf, rel_tol=1e-12):
        raise DomainError(f"Record at lambda={record.lam:g} was solved for q={record.q:g}, checked as q={qf:g}")
    if math.isfinite(record.m_lambda):
        # CSV rows carry no (N, q); m_λ = I_λ(u) is recomputed from the norms instead
        coeffs = EnergyForm.original().coefficients(ProblemParams(dim, q, record.lam))
        level = energy_from_norms(record.norms_u, coeffs, dim, qf)
        if not math.isclose(level, record.m_lambda, rel_tol=1e-9):
            raise DomainError(
                f"Record at lambda={record.lam:g} has m_lambda={record.m_lambda:.12g} but its norms give "
                f"{level:.12g} for N={dim}, q={qf:g}; the sweep belongs to another problem"
            )


def _ok_records(records: Iterable[SweepRecord], dim: int, q: Exponent, small: bool = True) -> list[SweepRecord]:
    kept = [r for r in records if r.ok and r.norms_u is not None]
    for record in kept:
        _check_problem(record, dim, q)
    if small:
        kept = [r for r in kept if r.lam < 1.0]
    return sorted(kept, key=lambda r: r.lam)


def _require_decades(lams: list[float], minimum: float) -> None:
    decades = math.log10(max(lams) / min(lams)) if len(lams) >= 2 else 0.0
    if decades < minimum - 1e-9:
        raise InsufficientDecades(
            f"The lambda window spans {decades:.2f} decades; {minimum:g} are needed to resolve the rates"
        )


def _rate_check(
    name: str,
    points: list[tuple[float, float]],
    exponent: float,
    log_power: float,
    tol: float,
    settings: CheckSettings,
    with_free: bool = False,
) -> ObservableCheck:
    details: dict[str, Any] = {"target_exponent": exponent, "target_log_power": log_power, "tolerance": tol}
    mode = LogPowerMode.pinned(log_power)
    try:
        fit = fit_power_law(points, mode)
    except FitError as exc:
        details["error"] = str(exc)
        return ObservableCheck(name, False, True, details)
    details["fit"] = fit.as_dict()
    if with_free:
        try:
            details["free_fit"] = fit_power_law(points, LogPowerMode.free()).as_dict()
        except FitError as exc:
            details["free_fit_error"] = str(exc)
    gap = half_window_gap(points, mode)
    details["half_window_gap"] = gap
    if gap is not None and gap > settings.stability_gap:
        logger.warning("%s: half-window exponents differ by %.3f", name, gap)
    passed = abs(fit.exponent - exponent) <= tol and fit.r_squared >= settings.r_squared_floor
    return ObservableCheck(name, passed, True, details)


def _count_check(name: str, flags: list[bool], gated: bool = True, **extra: Any) -> ObservableCheck:
    violations = flags.count(False)
    return ObservableCheck(name, violations == 0, gated, {"points": len(flags), "violations": violations, **extra})


# ── Small-λ scaling laws ────────────────────────────────────────────


def theorem1_targets(dim: int, q: Exponent) -> dict[str, tuple[float, float]]:
    """Observable → (power of λ, power of ln 1/λ) as λ → 0."""
    exps = exponents_for(dim, q)
    qf = float(q)
    if dim >= 5:
        return {
            "mu0": (-1.0 / (qf - 2.0), 0.0),
            "l2": (exps.sigma, 0.0),
            "lq": ((exps.two_star - qf) / (qf - 2.0), 0.0),
            "grad_defect": (exps.sigma, 0.0),
        }
    if dim == 4:
        lead = -(4.0 - qf) / (qf - 2.0)
        return {
            "mu0": (-1.0 / (qf - 2.0), 1.0 / (qf - 2.0)),
            "l2": (2.0 / (qf - 2.0), lead),
            "lq": ((4.0 - qf) / (qf - 2.0), lead),
            "xi": (1.0 / (qf - 2.0), -1.0 / (qf - 2.0)),
            "grad_defect": (2.0 / (qf - 2.0), lead),
        }
    if qf <= 4.0:
        raise DomainError(f"The N=3 small-lambda rates need q > 4, got q={qf}")
    return {
        "mu0": (-1.0 / (qf - 4.0), 0.0),
        "l2": (2.0 / (qf - 4.0), 0.0),
        "lq": ((6.0 - qf) / (qf - 4.0), 0.0),
        "xi": (2.0 / (qf - 4.0), 0.0),
        "grad_defect": (2.0 / (qf - 4.0), 0.0),
    }


def _observable(record: SweepRecord, name: str, dim: int) -> float:
    norms = record.norms_u
    if name == "mu0":
        return record.mu0
    if name == "l2":
        return norms.l2_sq
    if name == "lq":
        return norms.lq
    if name == "xi":
        return record.xi
    # ‖∇U‖₂² − ‖∇w‖₂² = S^{N/2} − ‖∇u‖₂²; the gradient norm is invariant under both rescalings
    return dim * m0_closed_form(dim) - norms.grad_sq


def _sandwich_checks(records: list[SweepRecord], dim: int, q: Exponent, settings: CheckSettings) -> list[ObservableCheck]:
    m0 = m0_closed_form(dim)
    slack = settings.sandwich_slack
    tau_ok, level_ok, triple_ok, ratio_ok, bound_ok = [], [], [], [], []
    triple_worst = ratio_worst = 0.0
    upper_ok, lq_ok = [], []
    two_star = critical_exponent(dim)
    sobolev = sobolev_constant(dim)
    interp_ok = [r.norms_u.interpolation_holds(float(q), two_star, slack) for r in records]
    sobolev_ok = [r.norms_u.sobolev_holds(sobolev, two_star, slack) for r in records]
    for record in records:
        params = ProblemParams(dim, q, record.lam)
        norms_v = v_norms_from_u(record.norms_u, params)
        tau = norms_v.grad_sq / norms_v.lcrit
        tau_ok.append(1.0 - slack < tau <= tau_upper_bound(dim, q, record.lam) + slack)
        level_ok.append(
            energy_lower_bound(dim, q, record.lam) - slack * m0 < record.m_lambda < m0 * (1.0 + slack)
        )

        triple = energy_triple(norms_v, params)
        spread = (max(triple) - min(triple)) / max(abs(t) for t in triple)
        triple_worst = max(triple_worst, spread)
        triple_ok.append(spread <= settings.identity_tol)

        defect = abs(l2_lq_defect_from_norms(norms_v, params))
        ratio_worst = max(ratio_worst, defect)
        ratio_ok.append(defect <= settings.identity_tol)
        bound_ok.append(norms_v.l2_sq <= l2_upper_bound(norms_v, params) * (1.0 + settings.identity_tol))

        if dim >= 5:
            upper_ok.append(record.m_lambda <= energy_upper_bound(dim, q, record.lam))
            lq_ok.append(norms_v.lq <= lq_upper_bound(dim, q))

    checks = [
        _count_check("tau_sandwich", tau_ok),
        _count_check("energy_sandwich", level_ok),
        _count_check("energy_triple", triple_ok, worst=triple_worst),
        _count_check("l2_lq_ratio", ratio_ok, worst=ratio_worst),
        _count_check("l2_bound", bound_ok),
        _count_check("interpolation", interp_ok),
        _count_check("sobolev", sobolev_ok),
    ]
    if dim >= 5:
        checks.append(_count_check("energy_upper_bound", upper_ok, gated=False))
        checks.append(_count_check("lq_upper_bound", lq_ok, gated=False))
    return checks


def check_theorem1(
    records: list[SweepRecord], dim: int, q: Exponent, settings: CheckSettings | None = None
) -> CheckReport:
    settings = settings or CheckSettings()
    ok = _ok_records(records, dim, q)
    minimum = settings.min_decades_log if dim == 4 else settings.min_decades
    _require_decades([r.lam for r in ok], minimum)
    targets = theorem1_targets(dim, q)

    checks: list[ObservableCheck] = []
    for name, (exponent, log_power) in targets.items():
        points = [(r.lam, _observable(r, name, dim)) for r in ok]
        points = [(lam, y) for lam, y in points if math.isfinite(y) and y > 0.0]
        tol = settings.exponent_tol if name in ("mu0", "l2", "lq") else settings.loose_exponent_tol
        checks.append(_rate_check(name, points, exponent, log_power, tol, settings, with_free=dim == 4))

    if dim >= 5:
        smallest = ok[0]
        v_peak = smallest.lam ** (1.0 / (float(q) - 2.0)) * smallest.mu0
        bubble_peak = TalentiBubble(dim, rho0(dim, q)).peak
        gap = abs(v_peak / bubble_peak - 1.0)
        checks.append(
            ObservableCheck(
                "v0_gap",
                gap <= settings.peak_gap_tol,
                True,
                {"lambda": smallest.lam, "v0": v_peak, "bubble_peak": bubble_peak, "relative_gap": gap},
            )
        )

    checks.extend(_sandwich_checks(ok, dim, q, settings))
    return _log_verdict(CheckReport(CheckBranch.THEOREM1, dim, float(q), tuple(checks)))


# ── Corollary envelope for δ_λ ──────────────────────────────────────


def delta_rate(dim: int, q: Exponent) -> tuple[float, float]:
    """Lower rate of δ_λ = m₀ − m_λ as (power of λ, power of ln 1/λ)."""
    qf = float(q)
    if dim >= 5:
        return exponents_for(dim, q).sigma, 0.0
    if dim == 4:
        return 2.0 / (qf - 2.0), -(4.0 - qf) / (qf - 2.0)
    if qf <= 4.0:
        raise DomainError(f"The N=3 energy rate needs q > 4, got q={qf}")
    return 2.0 / (qf - 4.0), 0.0


def check_corollary_envelope(
    records: list[SweepRecord], dim: int, q: Exponent, settings: CheckSettings | None = None
) -> CheckReport:
    settings = settings or CheckSettings()
    ok = _ok_records(records, dim, q)
    _require_decades([r.lam for r in ok], settings.min_decades_log if dim == 4 else settings.min_decades)
    sigma = exponents_for(dim, q).sigma
    exponent, log_power = delta_rate(dim, q)

    checks = [_count_check("delta_positive", [r.delta > 0.0 for r in ok])]
    deltas = [r.delta for r in ok]
    checks.append(_count_check("delta_monotone", [b > a for a, b in zip(deltas, deltas[1:])]))

    points = [(r.lam, r.delta) for r in ok if r.delta > 0.0]
    rate = _rate_check("delta_rate", points, exponent, log_power, settings.exponent_tol, settings)
    checks.append(rate)
    fit = rate.details.get("fit")
    checks.append(
        ObservableCheck(
            "delta_below_lambda_sigma",
            fit is not None and fit["exponent"] >= sigma - settings.exponent_tol,
            True,
            {"sigma": sigma, "exponent": None if fit is None else fit["exponent"]},
        )
    )
    return _log_verdict(CheckReport(CheckBranch.COROLLARY, dim, float(q), tuple(checks)))


# ── Large-λ limit ───────────────────────────────────────────────────


def h1_defect(norms_u: NormSet, soliton: NormSet, params: ProblemParams) -> float:
    """‖v_∞‖²_{H¹} − ‖v_λ‖²_{H¹} with v_λ = λ^{1/(q−2)}u_λ."""
    weight = params.lam ** (2.0 / (params.q_float - 2.0))
    return (soliton.grad_sq + soliton.l2_sq) - weight * (norms_u.grad_sq + norms_u.l2_sq)


def theorem3_report(
    records: list[SweepRecord],
    dim: int,
    q: Exponent,
    soliton: NormSet,
    soliton_peak: float,
    settings: CheckSettings | None = None,
) -> CheckReport:
    settings = settings or CheckSettings()
    ok = [r for r in _ok_records(records, dim, q, small=False) if r.lam > 1.0]
    _require_decades([r.lam for r in ok], settings.min_decades)
    qf = float(q)
    sigma = exponents_for(dim, q).sigma
    expected_prefactor = 1.0 / (qf - 2.0)

    defects = [(r.lam, h1_defect(r.norms_u, soliton, ProblemParams(dim, q, r.lam))) for r in ok]
    checks = [_count_check("defect_positive", [d > 0.0 for _, d in defects])]
    # D(λ) ∼ c λ^{−σ} is fitted as a power of ε = 1/λ
    points = [(1.0 / lam, d) for lam, d in defects if d > 0.0]
    rate = _rate_check("h1_defect", points, sigma, 0.0, settings.exponent_tol, settings)
    details = dict(rate.details)
    if "fit" in details:
        details["lambda_exponent"] = -details["fit"]["exponent"]
    checks.append(ObservableCheck(rate.name, rate.passed, True, details))

    # D(λ) = (2/(q−2))‖v_∞‖_{2*}^{2*} λ^{−σ} + o(λ^{−σ}); the prefactor is compared per unit 2‖v_∞‖_{2*}^{2*}
    norm_unit = 2.0 * soliton.lcrit
    fit = details.get("fit")
    fitted = None if fit is None else fit["prefactor"] / norm_unit
    lam_top, defect_top = defects[-1]
    checks.append(
        ObservableCheck(
            "h1_prefactor",
            fitted is not None and abs(fitted / expected_prefactor - 1.0) <= settings.prefactor_tol,
            True,
            {
                "normalized": fitted,
                "expected": expected_prefactor,
                "soliton_lcrit": soliton.lcrit,
                "lambda_top": lam_top,
                "top_estimate": defect_top * lam_top**sigma / norm_unit,
            },
        )
    )

    peaks = [r.lam ** (1.0 / (qf - 2.0)) * r.mu0 for r in ok]
    gaps = [abs(p - soliton_peak) for p in peaks]
    checks.append(
        _count_check("peak_monotone", [b <= a for a, b in zip(gaps, gaps[1:])], gated=False, soliton_peak=soliton_peak)
    )
    return _log_verdict(CheckReport(CheckBranch.THEOREM3, dim, qf, tuple(checks)))


def check_theorem3(
    dim: int,
    q: Exponent,
    lambdas: list[float],
    tol: float = 1e-8,
    jobs: int = 1,
    solver: SolverSettings | None = None,
    settings: CheckSettings | None = None,
) -> CheckReport:
    if min(lambdas) < 1.0:
        raise DomainError("The large-lambda check needs lambda >= 1 throughout")
    records = run_sweep(dim, q, lambdas, tol, jobs, solver, check_grid=False)
    limit = solve_limit_soliton(dim, q, tol, solver)
    soliton = radial_norms(limit.profile, float(q))
    return theorem3_report(records, dim, q, soliton, limit.mu0, settings)


# ── Decay envelopes ─────────────────────────────────────────────────


def check_envelope(
    dim: int,
    q: Exponent,
    lambdas: list[float],
    tol: float = 1e-8,
    solver: SolverSettings | None = None,
    settings: CheckSettings | None = None,
) -> CheckReport:
    settings = settings or CheckSettings()
    reports = []
    checks: list[ObservableCheck] = []
    for lam in sorted(lambdas):
        params = ProblemParams(dim, q, lam)
        try:
            v = rescale_v(solve_ground_state(params, tol, solver, allow_unproven=True).profile, params)
            xi = extract_xi(v)
            report = decay_envelope_check(rescale_w(v, xi), params, xi)
        except CritNLSError as exc:
            checks.append(ObservableCheck(f"envelope@{lam:g}", False, True, {"error": f"{type(exc).__name__}: {exc}"}))
            continue
        reports.append(report)
        checks.append(
            ObservableCheck(
                f"envelope@{lam:g}",
                report.ratio <= settings.envelope_ratio_max,
                True,
                report.as_dict(),
            )
        )
    if reports:
        checks.append(ObservableCheck("envelope_spread", True, False, envelope_spread(reports)))
    return _log_verdict(CheckReport(CheckBranch.ENVELOPE, dim, float(q), tuple(checks)))


# ── Mass constraint ─────────────────────────────────────────────────


def mass_points(records: list[SweepRecord], dim: int, q: Exponent) -> list[MassPoint]:
    return [mass_point_from_norms(r.norms_u, ProblemParams(dim, q, r.lam)) for r in _ok_records(records, dim, q)]


def mass_report(
    records: list[SweepRecord], dim: int, q: Exponent, settings: CheckSettings | None = None
) -> CheckReport:
    settings = settings or CheckSettings()
    ok = _ok_records(records, dim, q)
    _require_decades([r.lam for r in ok], settings.min_decades_log if dim == 4 else settings.min_decades)
    qf = float(q)
    points = mass_points(ok, dim, q)

    round_trip = [abs(lambda_of_omega(dim, q, p.omega) / p.lam - 1.0) <= 1e-10 for p in points]
    residual_ok = []
    for record, point in zip(ok, points):
        big_b = record.lam * record.norms_u.lq
        omega, m_rho, big_c = solve_mass_identities(record.norms_u.grad_sq, big_b, point.rho, dim, qf)
        residuals = mass_system_residuals(record.norms_u.grad_sq, big_b, big_c, omega, m_rho, point.rho, dim, qf)
        residual_ok.append(max(residuals) <= 1e-12)

    rhos = [p.rho for p in points]
    exponent, log_power = rho_rate(dim, q)
    checks = [
        _count_check("lambda_round_trip", round_trip),
        _count_check("system_residuals", residual_ok),
        _count_check("rho_monotone", [b > a for a, b in zip(rhos, rhos[1:])]),
        _rate_check("rho_rate", [(p.lam, p.rho) for p in points], exponent, log_power, settings.exponent_tol, settings),
    ]

    prefactor = calibrate_prefactor(points[0], dim, q)
    ratios = np.array([lambda_of_rho_model(p.rho, dim, q, prefactor) / p.lam for p in points])
    two_star = exponents_for(dim, q).two_star
    checks.append(
        ObservableCheck(
            "model_consistency",
            bool(np.all((ratios > 0.5) & (ratios < 2.0))),
            True,
            {
                "prefactor": prefactor,
                "ratio_min": float(ratios.min()),
                "ratio_max": float(ratios.max()),
                # uniqueness of positive solutions is known for 3 ≤ N ≤ 6, 2*−1 < q < 2*
                "theorem_backed": 3 <= dim <= 6 and two_star - 1.0 < qf < two_star,
            },
        )
    )
    return _log_verdict(CheckReport(CheckBranch.MASS, dim, qf, tuple(checks)))

