from __future__ import annotations

import math

import numpy as np
import pytest

from critnls.analysis.mass import (
    MassPoint,
    calibrate_prefactor,
    lambda_of_omega,
    lambda_of_rho_model,
    mass_constant,
    mass_point_from_profile,
    mass_system_residuals,
    mass_table,
    omega_of_lambda,
    rho_of_lambda,
    rho_rate,
    solve_mass_identities,
)
from critnls.errors import DomainError


@pytest.mark.parametrize("dim, q", [(3, 5.0), (4, 3.0), (5, 3.0), (6, 2.5)])
def test_identity_system_back_substitution(dim, q):
    rng = np.random.default_rng(dim)
    for A, B, rho in rng.uniform(0.1, 100.0, size=(1000, 3)):
        omega, m_rho, C = solve_mass_identities(A, B, rho, dim, q)
        residuals = mass_system_residuals(A, B, C, omega, m_rho, rho, dim, q)
        assert max(residuals) <= 1e-12


def test_identity_system_rejects_bad_inputs():
    with pytest.raises(DomainError):
        solve_mass_identities(0.0, 1.0, 1.0, 5, 3.0)
    with pytest.raises(DomainError):
        solve_mass_identities(1.0, 1.0, -1.0, 5, 3.0)
    with pytest.raises(DomainError):
        solve_mass_identities(1.0, 1.0, 1.0, 5, 10.0 / 3.0)


def test_mass_constant():
    assert mass_constant(5, 3.0) == pytest.approx(3.0 * (1.0 / 3.0) / 6.0)


def test_frequency_round_trip():
    for lam in (1e-6, 1e-3, 0.5):
        omega = omega_of_lambda(5, 3.0, lam)
        assert lambda_of_omega(5, 3.0, omega) == pytest.approx(lam, rel=1e-12)
    assert omega_of_lambda(5, 3.0, 1e-3) == pytest.approx(1e-3**-4.0)


def test_rho_rates():
    assert rho_rate(5, 3.0) == pytest.approx((8.0 / 3.0, 0.0))
    assert rho_rate(4, 3.0) == pytest.approx((2.0, -0.5))
    assert rho_rate(3, 5.0) == pytest.approx((3.0, 0.0))
    with pytest.raises(DomainError):
        rho_rate(3, 4.0)


@pytest.mark.parametrize("dim, q", [(5, 3.0), (6, 2.5), (3, 5.0)])
def test_power_model_inverts_rho_rate(dim, q):
    a, _ = rho_rate(dim, q)
    for lam in (1e-5, 1e-3):
        assert lambda_of_rho_model(lam**a, dim, q) == pytest.approx(lam, rel=1e-10)


def test_four_dim_model_uses_lambert_branch():
    values = [lambda_of_rho_model(rho, 4, 3.0) for rho in (1e-6, 1e-4, 1e-2)]
    assert all(v > 0.0 and math.isfinite(v) for v in values)
    assert values == sorted(values)


def test_model_rejects_bad_inputs():
    with pytest.raises(DomainError):
        lambda_of_rho_model(0.0, 5, 3.0)
    with pytest.raises(DomainError):
        lambda_of_rho_model(1.0, 5, 3.0, prefactor=0.0)
    with pytest.raises(DomainError):
        lambda_of_rho_model(1.0, 3, 3.5)


def test_calibrated_model_reproduces_point():
    point = MassPoint(rho=1e-3, omega=1.0, m_rho=1.0, lam=2e-4)
    for dim, q in ((5, 3.0), (4, 3.0)):
        prefactor = calibrate_prefactor(point, dim, q)
        assert lambda_of_rho_model(point.rho, dim, q, prefactor) == pytest.approx(point.lam, rel=1e-12)


def test_mass_table_sorted_by_rho():
    points = [MassPoint(0.3, 1.0, 1.0, 0.3), MassPoint(0.1, 2.0, 1.0, 0.1), MassPoint(0.2, 1.5, 1.0, 0.2)]
    rows = mass_table(points, 5, 3.0, 1.0)
    assert [row["rho"] for row in rows] == [0.1, 0.2, 0.3]
    assert set(rows[0]) == {"rho", "omega", "m_rho", "lambda", "lambda_model"}
    assert points[0].as_dict()["lambda"] == 0.3


def test_identity_frequency_matches_exact_frequency(solved_n5):
    params, result = solved_n5
    check = mass_point_from_profile(params, result)
    assert check.relative_gap <= 1e-6
    point = rho_of_lambda(params, result)
    assert point.rho == pytest.approx(check.point.rho, rel=1e-6)
    assert point.omega == pytest.approx(omega_of_lambda(5, 3.0, params.lam))
    assert check.as_dict()["point"]["lambda"] == params.lam
