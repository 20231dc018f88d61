"""Desk-scale acceptance sweeps; each fixture runs a full λ-window."""

from __future__ import annotations

import os

import pytest

from critnls.analysis.asymptotics import lambda_grid, run_sweep
from critnls.analysis.checks import (
    check_corollary_envelope,
    check_envelope,
    check_theorem1,
    check_theorem3,
    mass_report,
)
from critnls.core.params import ProblemParams
from critnls.errors import NoDecayingSolution
from critnls.solver.shooting import solve_ground_state

pytestmark = pytest.mark.slow

JOBS = os.cpu_count() or 1


@pytest.fixture(scope="module")
def sweep_n5():
    return run_sweep(5, 3.0, lambda_grid(1e-4, 1e-1, 8), jobs=JOBS)


@pytest.fixture(scope="module")
def sweep_n3():
    return run_sweep(3, 5.0, lambda_grid(1e-4, 1e-1, 8), jobs=JOBS)


def test_every_point_is_certified(sweep_n5, sweep_n3):
    assert len(sweep_n5) == 25
    assert all(record.ok for record in sweep_n5 + sweep_n3)


def test_small_lambda_rates_five_dim(sweep_n5):
    report = check_theorem1(sweep_n5, 5, 3.0)
    assert report.passed, report.failing()
    assert report.check("tau_sandwich").details["violations"] == 0
    assert report.check("energy_sandwich").details["violations"] == 0
    assert report.check("l2_lq_ratio").details["worst"] <= 1e-6


def test_energy_gap_and_mass_map_five_dim(sweep_n5):
    assert check_corollary_envelope(sweep_n5, 5, 3.0).passed
    report = mass_report(sweep_n5, 5, 3.0)
    assert report.passed, report.failing()
    assert report.check("rho_rate").details["fit"]["exponent"] == pytest.approx(8.0 / 3.0, abs=0.05)


def test_small_lambda_rates_three_dim(sweep_n3):
    report = check_theorem1(sweep_n3, 3, 5.0)
    assert report.passed, report.failing()
    assert report.check("xi").details["fit"]["exponent"] == pytest.approx(2.0, abs=0.1)


def test_decay_envelopes_three_dim():
    report = check_envelope(3, 5.0, [1e-4, 1e-3, 1e-2, 1e-1])
    assert report.passed, report.failing()


def test_log_corrected_rates_four_dim():
    records = run_sweep(4, 3.0, lambda_grid(1e-5, 1e-1, 8), jobs=JOBS)
    report = check_theorem1(records, 4, 3.0)
    assert report.passed, report.failing()
    l2 = report.check("l2").details
    assert l2["fit"]["r_squared"] >= 0.99
    assert l2["free_fit"]["exponent"] == pytest.approx(2.0, abs=0.1)


def test_large_lambda_defect_three_dim():
    report = check_theorem3(3, 4.0, lambda_grid(10.0, 1e4, 8), jobs=JOBS)
    assert report.passed, report.failing()
    assert report.check("h1_defect").details["lambda_exponent"] == pytest.approx(-2.0, abs=0.05)
    assert report.check("h1_prefactor").details["normalized"] == pytest.approx(0.5, rel=0.1)


def test_no_ground_state_below_threshold():
    with pytest.raises(NoDecayingSolution):
        solve_ground_state(ProblemParams(3, 3.0, 1e-3), allow_unproven=True)
