from __future__ import annotations

import math
from fractions import Fraction

import pytest

from critnls.core.params import (
    Existence,
    GQLimit,
    ProblemParams,
    critical_exponent,
    derive_exponents,
    endpoint_limits,
    existence_region,
    gq_constants,
    parse_exponent,
)
from critnls.errors import DimensionError, DomainError, ExponentRangeError


def test_critical_exponent():
    assert critical_exponent(3) == 6.0
    assert critical_exponent(4) == 4.0
    assert critical_exponent(5) == pytest.approx(10.0 / 3.0)


@pytest.mark.parametrize("dim", [2, 1, 0])
def test_dimension_below_three_rejected(dim):
    with pytest.raises(DimensionError):
        ProblemParams(dim, 3.0)


@pytest.mark.parametrize("q", [2.0, 2.0 + 1e-12, 10.0 / 3.0, 4.0, 1.5])
def test_exponent_outside_range_rejected(q):
    with pytest.raises(ExponentRangeError):
        ProblemParams(5, q)


def test_negative_lambda_rejected():
    with pytest.raises(DomainError):
        ProblemParams(5, 3.0, -1e-3)


def test_parse_exponent_keeps_fractions_exact():
    assert parse_exponent("7/2") == Fraction(7, 2)
    assert isinstance(parse_exponent("7/2"), Fraction)
    assert parse_exponent(" 3 ") == 3.0
    with pytest.raises(ValueError):
        parse_exponent("7/0")


def test_derived_exponents_n5_q3():
    exps = derive_exponents(ProblemParams(5, 3.0, 1e-2))
    assert exps.two_star == pytest.approx(10.0 / 3.0)
    assert exps.sigma == pytest.approx(4.0 / 3.0)
    assert exps.s == 1.5
    assert exps.l2_lq_ratio == pytest.approx(1.0 / 6.0)


def test_fraction_and_float_exponents_agree():
    exact = derive_exponents(ProblemParams(3, Fraction(9, 2)))
    approx = derive_exponents(ProblemParams(3, 4.5))
    assert exact.sigma == pytest.approx(approx.sigma, rel=1e-15)
    assert exact.l2_lq_ratio == pytest.approx(approx.l2_lq_ratio, rel=1e-15)


def test_gq_constants_n5_q3():
    big_q, big_g = gq_constants(5, 3.0)
    assert big_q == pytest.approx(0.25 ** (1.0 / 3.0), rel=1e-14)
    assert big_q == pytest.approx(0.629961, abs=1e-6)
    assert big_g == pytest.approx(0.472470, abs=1e-6)


def test_gq_limits_match_nearby_values():
    lower = gq_constants(5, limit=GQLimit.LOWER)
    upper = gq_constants(5, limit=GQLimit.UPPER)
    assert lower == (math.exp(-1.0), 0.0)
    assert upper == (1.0, 1.0)
    near_lower = gq_constants(5, 2.0 + 1e-6)
    near_upper = gq_constants(5, 10.0 / 3.0 - 1e-6)
    assert near_lower[0] == pytest.approx(math.exp(-1.0), rel=1e-5)
    assert near_lower[1] == pytest.approx(0.0, abs=1e-5)
    assert near_upper[0] == pytest.approx(1.0, abs=1e-4)
    assert near_upper[1] == pytest.approx(1.0, abs=1e-4)


def test_gq_requires_q_without_limit():
    with pytest.raises(ExponentRangeError):
        gq_constants(5)


def test_endpoint_limits():
    limits = endpoint_limits(5)
    assert limits["two_over_q_power_at_2"] == pytest.approx(math.exp(-2.0 / 3.0))
    assert limits["scaled_ratio_at_critical"] == pytest.approx(0.75)
    q = 2.0 + 1e-7
    two_star = 10.0 / 3.0
    assert (2.0 / q) ** ((two_star - q) / (q - 2.0)) == pytest.approx(limits["two_over_q_power_at_2"], rel=1e-5)


@pytest.mark.parametrize(
    "dim, q, expected",
    [
        (5, 3.0, Existence.EXISTS),
        (4, 3.0, Existence.EXISTS),
        (3, 5.0, Existence.EXISTS),
        (3, 4.0, Existence.EXISTS_FOR_LARGE_LAMBDA),
        (3, 3.0, Existence.EXISTS_FOR_LARGE_LAMBDA),
    ],
)
def test_existence_region(dim, q, expected):
    assert existence_region(ProblemParams(dim, q, 1e-3)) is expected
