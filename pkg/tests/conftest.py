from __future__ import annotations

import math

import pytest

from critnls.analysis.asymptotics import SweepRecord
from critnls.core.norms import NormSet
from critnls.core.params import ProblemParams
from critnls.solver.shooting import solve_ground_state, solve_limit_soliton


@pytest.fixture(scope="session")
def solved_n5():
    params = ProblemParams(5, 3.0, 1e-2)
    return params, solve_ground_state(params)


@pytest.fixture(scope="session")
def solved_n3():
    params = ProblemParams(3, 5.0, 1e-2)
    return params, solve_ground_state(params)


@pytest.fixture(scope="session")
def soliton_n3():
    return solve_limit_soliton(3, 4.0)


@pytest.fixture
def make_records():
    """Synthetic sweep records from per-λ observables.

    ``columns`` maps a SweepRecord field (or a NormSet field) to a function of λ.
    """

    def build(lambdas, **columns):
        records = []
        for lam in lambdas:
            values = {name: fn(lam) for name, fn in columns.items()}
            norms = NormSet(
                values.pop("grad_sq", 1.0),
                values.pop("l2_sq", 1.0),
                values.pop("lq", 1.0),
                values.pop("lcrit", 1.0),
            )
            records.append(
                SweepRecord(
                    lam=lam,
                    mu0=values.get("mu0", 1.0),
                    norms_u=norms,
                    m_lambda=values.get("m_lambda", math.nan),
                    delta=values.get("delta", math.nan),
                    tau=values.get("tau", math.nan),
                    xi=values.get("xi", math.nan),
                )
            )
        return records

    return build
