from __future__ import annotations

import math

import numpy as np
import pytest

from critnls.analysis.asymptotics import (
    EnvelopeReport,
    SweepRecord,
    decay_envelope_check,
    energy_lower_bound,
    energy_upper_bound,
    envelope_spread,
    extract_xi,
    lambda_grid,
    lq_upper_bound,
    rescale_v,
    rescale_w,
    run_sweep,
    sweep_point,
    tau_upper_bound,
    v_norms_from_u,
    validate_grid,
    w_norms_from_v,
    xi_u_from_v,
)
from critnls.analysis.functionals import IdentityForm, l2_lq_identity_defect, radial_norms
from critnls.core.params import ProblemParams
from critnls.core.talenti import TalentiBubble, m0_closed_form, talenti_profile
from critnls.errors import (
    DivergentNormError,
    DomainError,
    InsufficientDecades,
    NotConcentratedError,
    RescaleError,
)
from critnls.solver.shooting import SolverSettings


@pytest.fixture(scope="module")
def narrow_bubble():
    return talenti_profile(TalentiBubble(5, 0.25))


def test_extract_xi_inverts_bubble_scale(narrow_bubble):
    assert extract_xi(narrow_bubble) == pytest.approx(0.25, rel=1e-14)
    with pytest.raises(NotConcentratedError):
        extract_xi(talenti_profile(TalentiBubble(5, 2.0), points_per_decade=20))


def test_concentration_rescaling_recovers_unit_bubble(narrow_bubble):
    w = rescale_w(narrow_bubble, 0.25)
    np.testing.assert_allclose(w.values, TalentiBubble(5).value(w.grid), rtol=1e-12)
    assert w.center_value == pytest.approx(TalentiBubble(5).peak, rel=1e-14)


def test_rescalings_reject_degenerate_inputs(narrow_bubble):
    with pytest.raises(RescaleError):
        rescale_w(narrow_bubble, 0.0)
    with pytest.raises(RescaleError):
        rescale_v(narrow_bubble, ProblemParams(5, 3.0, 0.0))


def test_w_norm_map_matches_quadrature(narrow_bubble):
    params = ProblemParams(5, 3.0, 1e-3)
    mapped = w_norms_from_v(radial_norms(narrow_bubble, 3.0), params, 0.25)
    direct = radial_norms(rescale_w(narrow_bubble, 0.25), 3.0)
    assert mapped.grad_sq == pytest.approx(direct.grad_sq, rel=1e-10)
    assert mapped.l2_sq == pytest.approx(direct.l2_sq, rel=1e-10)
    assert mapped.lq == pytest.approx(direct.lq, rel=1e-10)
    assert mapped.lcrit == pytest.approx(direct.lcrit, rel=1e-10)


def test_v_norm_map_matches_quadrature(solved_n5):
    params, result = solved_n5
    mapped = v_norms_from_u(radial_norms(result.profile, 3.0), params)
    direct = radial_norms(rescale_v(result.profile, params), 3.0)
    for name in ("grad_sq", "l2_sq", "lq", "lcrit"):
        assert getattr(mapped, name) == pytest.approx(getattr(direct, name), rel=1e-9)


def test_xi_convention():
    params = ProblemParams(5, 3.0, 1e-3)
    assert xi_u_from_v(2.0, params) == pytest.approx(2.0 * 1e-3 ** (2.0 / 3.0))


def test_lambda_grid():
    grid = lambda_grid(1e-4, 1e-1, 8)
    assert len(grid) == 25
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(1e-1)
    assert all(b > a for a, b in zip(grid, grid[1:]))
    with pytest.raises(DomainError):
        lambda_grid(1e-1, 1e-4, 8)


def test_validate_grid():
    validate_grid(lambda_grid(1e-4, 1e-2, 8))
    with pytest.raises(InsufficientDecades):
        validate_grid(lambda_grid(1e-3, 1e-2, 8))
    with pytest.raises(DomainError):
        validate_grid(lambda_grid(1e-4, 1e-2, 2))


def test_bounds():
    lam = 1e-3
    assert tau_upper_bound(5, 3.0, lam) > 1.0
    assert energy_lower_bound(5, 3.0, lam) < m0_closed_form(5)
    assert lq_upper_bound(5, 3.0) > 0.0
    with pytest.raises(DivergentNormError):
        energy_upper_bound(4, 3.0, lam)


def test_sweep_record_satisfies_energy_sandwich(solved_n5):
    params, _ = solved_n5
    record = sweep_point(params, 1e-8)
    assert record.ok
    assert record.delta > 0.0
    assert energy_lower_bound(5, 3.0, params.lam) <= record.m_lambda * (1.0 + 1e-9)
    assert 1.0 <= record.tau <= tau_upper_bound(5, 3.0, params.lam) * (1.0 + 1e-9)
    assert record.mu0 == pytest.approx(solved_n5[1].mu0, rel=1e-12)


def test_failed_point_records_error_name():
    record = sweep_point(ProblemParams(5, 3.0, 1e-2), 1e-8, SolverSettings(max_bisection=1))
    assert record.status == "ToleranceNotReached"
    assert not record.ok
    assert math.isnan(record.mu0)
    assert record.norms_u is None


def test_run_sweep_sorts_records():
    records = run_sweep(5, 3.0, [5e-2, 1e-2], check_grid=False)
    assert [record.lam for record in records] == [1e-2, 5e-2]
    assert all(record.ok for record in records)
    assert records[0].delta < records[1].delta


def test_unit_bubble_envelope_constants():
    w = talenti_profile(TalentiBubble(3))
    report = decay_envelope_check(w, ProblemParams(3, 5.0, 0.0), 1.0)
    assert report.kappa == 0.0
    assert report.c_up == pytest.approx(3.0**0.25 * math.sqrt(2.0), rel=1e-6)
    assert report.ratio == pytest.approx(2.0, rel=1e-6)


def test_solved_profile_envelope(solved_n3):
    params, result = solved_n3
    v = rescale_v(result.profile, params)
    report = decay_envelope_check(rescale_w(v, 1.0), params, 1.0)
    assert report.c_low > 0.0
    assert report.ratio < 1e3
    assert report.radii[1] == pytest.approx(20.0 / report.kappa)


def test_envelope_spread():
    reports = [EnvelopeReport(2.0, 1.0, 0.1, (1.0, 200.0)), EnvelopeReport(3.0, 0.5, 0.2, (1.0, 100.0))]
    spread = envelope_spread(reports)
    assert spread["c_up_max"] == 3.0
    assert spread["c_low_min"] == 0.5
    assert spread["max_ratio"] == 6.0
    with pytest.raises(DomainError):
        envelope_spread([])


def test_empty_envelope_range(narrow_bubble):
    with pytest.raises(DomainError):
        decay_envelope_check(narrow_bubble, ProblemParams(5, 3.0, 0.0), 1.0, outer=0.5)


def test_sweep_record_defaults():
    record = SweepRecord(1e-3, status="NoDecayingSolution")
    assert not record.ok
    assert record.flags == ()


def test_concentration_rescalings_compose(solved_n5):
    params, result = solved_n5
    v = rescale_v(result.profile, params)
    twice = rescale_w(rescale_w(v, 0.5), 0.3)
    once = rescale_w(v, 0.15)
    radii = np.geomspace(1e-2, 1e2, 25)
    np.testing.assert_allclose(twice.evaluate(radii), once.evaluate(radii), rtol=1e-10)
    assert twice.coeffs.mass == pytest.approx(once.coeffs.mass, rel=1e-12)
    for (p1, b1), (p2, b2) in zip(twice.coeffs.terms, once.coeffs.terms):
        assert p1 == p2
        assert b1 == pytest.approx(b2, rel=1e-12)


def test_w_form_identity_on_solved_profile(solved_n5):
    params, result = solved_n5
    v = rescale_v(result.profile, params)
    assert abs(l2_lq_identity_defect(v, params)) <= 1e-6
    for xi in (0.2, 0.7):
        w = rescale_w(v, xi)
        assert abs(l2_lq_identity_defect(w, params, IdentityForm.W, xi)) <= 1e-6
    # weighed with the wrong scale the identity breaks
    assert abs(l2_lq_identity_defect(rescale_w(v, 0.2), params, IdentityForm.W, 0.7)) > 0.1


def test_sweep_records_carry_their_problem():
    failed = sweep_point(ProblemParams(5, 3.0, 1e-2), 1e-8, SolverSettings(max_bisection=1))
    assert not failed.ok
    assert (failed.dim, failed.q) == (5, 3.0)
    assert SweepRecord(1e-2).dim is None
