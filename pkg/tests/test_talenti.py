from __future__ import annotations

import math

import pytest

from critnls.analysis.functionals import radial_norms
from critnls.core.talenti import (
    TalentiBubble,
    bubble_moment,
    bubble_moment_closed_form,
    g0,
    g0_at_rho0_closed_form,
    m0_closed_form,
    rho0,
    sobolev_constant,
    sobolev_m0,
    talenti_eval,
    talenti_norms,
    talenti_profile,
)
from critnls.errors import DivergentNormError, DomainError


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_quadrature_matches_gamma_closed_forms(dim):
    q = 2.5
    norms = talenti_norms(dim, q)
    target = sobolev_constant(dim) ** (dim / 2.0)
    assert norms.grad_sq == pytest.approx(target, rel=1e-10)
    assert norms.lcrit == pytest.approx(target, rel=1e-10)
    assert sobolev_m0(dim) == pytest.approx(m0_closed_form(dim), rel=1e-10)


@pytest.mark.parametrize("c, alpha", [(3.0, 3.0), (5.0, 5.0), (7.0, 5.0), (5.0, 3.75), (4.0, 2.5)])
def test_bubble_moment_matches_beta_function(c, alpha):
    assert bubble_moment(c, alpha) == pytest.approx(bubble_moment_closed_form(c, alpha), rel=1e-11)


def test_divergent_moments():
    assert math.isinf(bubble_moment(3.0, 1.0))
    assert math.isinf(talenti_norms(4, 3.0).l2_sq)
    assert math.isinf(talenti_norms(3, 5.0).l2_sq)
    assert math.isfinite(talenti_norms(5, 3.0).l2_sq)
    with pytest.raises(DivergentNormError):
        talenti_norms(4, 3.0, require_l2=True)
    with pytest.raises(DivergentNormError):
        rho0(4, 3.0)


def test_bubble_peak_and_scaling():
    unit = TalentiBubble(3)
    assert unit.peak == pytest.approx(3.0 ** 0.25)
    assert talenti_eval(TalentiBubble(5, 0.5), 0.0) == pytest.approx(0.5 ** -1.5 * 15.0 ** 0.75)
    with pytest.raises(DomainError):
        talenti_eval(unit, -1.0)
    with pytest.raises(DomainError):
        TalentiBubble(5, 0.0)


def test_scaled_norms_follow_exact_scalings():
    rho = 0.37
    unit = talenti_norms(5, 3.0)
    scaled = talenti_norms(5, 3.0, rho=rho)
    assert scaled.grad_sq == pytest.approx(unit.grad_sq)
    assert scaled.l2_sq == pytest.approx(rho**2 * unit.l2_sq)
    assert scaled.lq == pytest.approx(rho**0.5 * unit.lq)


def test_rho0_maximizes_g0():
    best = rho0(5, 3.0)
    assert best > 0.0
    peak = g0(5, 3.0, best)
    assert peak > g0(5, 3.0, 0.9 * best)
    assert peak > g0(5, 3.0, 1.1 * best)
    assert peak == pytest.approx(g0_at_rho0_closed_form(5, 3.0), rel=1e-10)


@pytest.mark.parametrize("dim, q", [(5, 3.0), (3, 5.0)])
def test_sampled_profile_quadrature(dim, q):
    bubble = TalentiBubble(dim)
    norms = radial_norms(talenti_profile(bubble), q)
    exact = talenti_norms(dim, q)
    assert norms.grad_sq == pytest.approx(exact.grad_sq, rel=1e-7)
    assert norms.lcrit == pytest.approx(exact.lcrit, rel=1e-7)
    assert norms.lq == pytest.approx(exact.lq, rel=1e-7)
