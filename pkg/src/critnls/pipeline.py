"""
critnls pipeline: runs one command of the harness and writes its outputs.

* ``SOLVE``   : ground state u_λ, profile JSON and a residual/norm report
* ``SOLITON`` : positive solution of −Δv + v = v^{q−1} (the λ → ∞ limit)
* ``SWEEP``   : ground states over the λ-window, sweep CSV sorted by λ
* ``CHECK``   : verification report over a sweep CSV (or a fresh sweep)
* ``TALENTI`` : bubble norms, ρ₀, m₀ and the constants Q(q), G(q)
* ``MASS``    : exact ρ ↔ λ map from a sweep next to the calibrated model

Library modules never read the environment; every tolerance comes from the
``RunConfig`` through ``solver_settings()`` / ``check_settings()``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from critnls.analysis.asymptotics import SweepRecord, run_sweep
from critnls.analysis.checks import (
    CheckBranch,
    CheckReport,
    check_corollary_envelope,
    check_envelope,
    check_theorem1,
    check_theorem3,
    mass_points,
    mass_report,
    theorem3_report,
)
from critnls.analysis.functionals import EnergyForm, energy, radial_norms
from critnls.analysis.mass import calibrate_prefactor, mass_table
from critnls.config import Command, RunConfig
from critnls.core.params import ProblemParams, derive_exponents, existence_region, gq_constants
from critnls.core.talenti import (
    g0_at_rho0_closed_form,
    m0_closed_form,
    rho0,
    sobolev_constant,
    sobolev_m0,
    talenti_norms,
)
from critnls.errors import DomainError
from critnls.io import params_as_dict, read_sweep_csv, write_json, write_mass_csv, write_profile, write_sweep_csv
from critnls.solver.shooting import ShootingResult, solve_ground_state, solve_limit_soliton

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    command: Command
    outputs: list[Path] = field(default_factory=list)
    passed: bool = True
    summary: dict[str, Any] = field(default_factory=dict)


class HarnessPipeline:
    """Runs the command selected by ``config.command``."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.mode = config.mode
        self.solver = config.solver_settings()
        self.checks = config.check_settings()
        logger.info("Command: %s (N=%d, q=%s)", self.mode.value, config.dim, config.q)

    def run(self) -> RunResult:
        handlers = {
            Command.SOLVE: self.run_solve,
            Command.SOLITON: self.run_soliton,
            Command.SWEEP: self.run_sweep,
            Command.CHECK: self.run_check,
            Command.TALENTI: self.run_talenti,
            Command.MASS: self.run_mass,
        }
        return handlers[self.mode]()

    # ── Single solves ───────────────────────────────────────────────

    def _params(self) -> ProblemParams:
        return ProblemParams(self.config.dim, self.config.exponent, self.config.lam)

    def _residual_report(self, params: ProblemParams, result: ShootingResult) -> dict[str, Any]:
        norms = radial_norms(result.profile, params.q_float)
        return {
            "params": params_as_dict(params),
            "existence": existence_region(params).value,
            "mu0": result.mu0,
            "frame": result.frame.value,
            "flags": list(result.flags),
            "bisection_iterations": result.bisection_iterations,
            "bracket_width": result.bracket_width,
            "residuals": result.residual_report.as_dict(),
            "norms": norms.as_dict(),
            "energy": energy(result.profile, params, EnergyForm.original()) if params.lam > 0 else None,
        }

    def run_solve(self) -> RunResult:
        params = self._params()
        result = solve_ground_state(params, self.config.tol, self.solver, allow_unproven=True)
        target = self.config.output_path()
        report = self._residual_report(params, result)
        outputs = [
            write_profile(target, params, result),
            write_json(target.with_name(f"{target.stem}.report.json"), report),
        ]
        return RunResult(self.mode, outputs, True, report)

    def run_soliton(self) -> RunResult:
        params = ProblemParams(self.config.dim, self.config.exponent, 0.0)
        result = solve_limit_soliton(params.dim, params.q, self.config.tol, self.solver)
        target = self.config.output_path()
        report = self._residual_report(params, result)
        outputs = [
            write_profile(target, params, result),
            write_json(target.with_name(f"{target.stem}.report.json"), report),
        ]
        return RunResult(self.mode, outputs, True, report)

    # ── Sweeps and checks ───────────────────────────────────────────

    def _sweep(self, lambdas: list[float] | None = None, check_grid: bool = True) -> list[SweepRecord]:
        config = self.config
        return run_sweep(
            config.dim,
            config.exponent,
            lambdas or config.lambdas(),
            config.tol,
            config.jobs,
            self.solver,
            check_grid=check_grid,
        )

    def run_sweep(self) -> RunResult:
        records = self._sweep()
        path = write_sweep_csv(self.config.output_path(), records)
        failed = [r.lam for r in records if not r.ok]
        return RunResult(self.mode, [path], True, {"points": len(records), "failed": failed})

    def _records(self) -> list[SweepRecord]:
        if self.config.input_path:
            records = read_sweep_csv(self.config.input_path)
            logger.info("Read %d sweep records from %s", len(records), self.config.input_path)
            return records
        return self._sweep()

    def _branch_report(self, branch: CheckBranch, records: list[SweepRecord] | None) -> CheckReport:
        config = self.config
        dim, q = config.dim, config.exponent
        if branch is CheckBranch.THEOREM1:
            return check_theorem1(records, dim, q, self.checks)
        if branch is CheckBranch.COROLLARY:
            return check_corollary_envelope(records, dim, q, self.checks)
        if branch is CheckBranch.MASS:
            return mass_report(records, dim, q, self.checks)
        if branch is CheckBranch.THEOREM3:
            large = [r for r in records or () if r.lam > 1.0]
            if not large:
                return check_theorem3(dim, q, config.lambdas(), config.tol, config.jobs, self.solver, self.checks)
            limit = solve_limit_soliton(dim, q, config.tol, self.solver)
            soliton = radial_norms(limit.profile, float(q))
            return theorem3_report(large, dim, q, soliton, limit.mu0, self.checks)
        # one profile per decade keeps the envelope check cheap
        lambdas = config.lambdas()[:: max(config.points_per_decade, 1)]
        return check_envelope(dim, q, lambdas, config.tol, self.solver, self.checks)

    def run_check(self) -> RunResult:
        branches = self.config.branches()
        if not branches:
            raise DomainError("check requires at least one report branch")
        needs_records = any(b is not CheckBranch.ENVELOPE for b in branches)
        records = self._records() if needs_records else None
        reports = {branch.value: self._branch_report(branch, records) for branch in branches}
        passed = all(report.passed for report in reports.values())
        payload = {
            "dim": self.config.dim,
            "q": self.config.q,
            "passed": passed,
            "branches": {name: report.to_dict() for name, report in reports.items()},
        }
        path = write_json(self.config.output_path(), payload)
        failing = {name: report.failing() for name, report in reports.items() if not report.passed}
        return RunResult(self.mode, [path], passed, {"failing": failing})

    # ── Closed forms and the mass map ───────────────────────────────

    def run_talenti(self) -> RunResult:
        dim, q = self.config.dim, self.config.exponent
        exps = derive_exponents(ProblemParams(dim, q))
        big_q, big_g = gq_constants(dim, q)
        payload: dict[str, Any] = {
            "dim": dim,
            "q": self.config.q,
            "two_star": exps.two_star,
            "sigma": exps.sigma,
            "sobolev_constant": sobolev_constant(dim),
            "m0": sobolev_m0(dim),
            "m0_closed_form": m0_closed_form(dim),
            "Q": big_q,
            "G": big_g,
            "norms": talenti_norms(dim, q).as_dict(),
            "rho0": None,
            "g0_rho0": None,
        }
        if dim >= 5:
            payload["rho0"] = rho0(dim, q)
            payload["g0_rho0"] = g0_at_rho0_closed_form(dim, q)
        path = write_json(self.config.output_path(), payload)
        return RunResult(self.mode, [path], True, payload)

    def run_mass(self) -> RunResult:
        dim, q = self.config.dim, self.config.exponent
        records = self._records()
        points = mass_points(records, dim, q)
        if not points:
            raise DomainError("No certified small-lambda sweep points to build the mass table from")
        # the smallest λ is the most asymptotic calibration point
        prefactor = calibrate_prefactor(points[0], dim, q)
        path = write_mass_csv(self.config.output_path(), mass_table(points, dim, q, prefactor))
        return RunResult(self.mode, [path], True, {"points": len(points), "prefactor": prefactor})
