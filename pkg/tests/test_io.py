from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from critnls.analysis.asymptotics import SweepRecord
from critnls.core.norms import NormSet
from critnls.core.params import ProblemParams
from critnls.core.talenti import TalentiBubble, talenti_profile
from critnls.errors import ParseError
from critnls.io import (
    MASS_HEADER,
    SWEEP_HEADER,
    atomic_write_text,
    format_float,
    parse_sweep_csv,
    read_json,
    read_mass_csv,
    read_profile,
    read_sweep_csv,
    sweep_csv_text,
    to_json_safe,
    write_json,
    write_mass_csv,
    write_profile,
    write_sweep_csv,
)
from critnls.solver.shooting import Frame, ResidualReport, ShootingResult


def test_csv_headers_are_stable():
    assert sweep_csv_text([]) == "lambda,mu0,grad_sq,l2_sq,lq,lcrit,m_lambda,delta,tau,xi,status\n"
    assert MASS_HEADER == ["rho", "omega", "m_rho", "lambda", "lambda_model"]


def test_float_format_round_trips_binary64():
    for value in (0.1 + 0.2, 1.0 / 3.0, 5e-324, 1.7976931348623157e308, -2.5e-17):
        assert float(format_float(value)) == value


def test_sweep_csv_round_trip_with_failed_point(tmp_path):
    records = [
        SweepRecord(
            lam=1e-4,
            mu0=1.0 / 3.0,
            norms_u=NormSet(0.1 + 0.2, 2.0 / 7.0, 1e-9, 4.5),
            m_lambda=1.25,
            delta=3e-6,
            tau=1.0 + 1e-9,
            xi=0.7,
        ),
        SweepRecord(lam=2e-4, status="NoDecayingSolution"),
    ]
    path = write_sweep_csv(tmp_path / "sweep.csv", records)
    back = read_sweep_csv(path)
    assert len(back) == 2
    assert back[0] == records[0]
    assert back[1].status == "NoDecayingSolution"
    assert back[1].norms_u is None
    assert math.isnan(back[1].mu0)
    assert back[1].lam == 2e-4


def test_sweep_csv_errors_carry_line_numbers():
    header = ",".join(SWEEP_HEADER)
    good = ",".join(["1e-3"] * 10 + ["ok"])
    with pytest.raises(ParseError) as bad_header:
        parse_sweep_csv("lambda,mu0\n" + good + "\n", "sweep.csv")
    assert bad_header.value.line == 1
    with pytest.raises(ParseError) as short_row:
        parse_sweep_csv(f"{header}\n{good}\n1e-3,2\n", "sweep.csv")
    assert short_row.value.line == 3
    with pytest.raises(ParseError) as not_number:
        parse_sweep_csv(f"{header}\n" + good.replace("1e-3", "abc", 1) + "\n", "sweep.csv")
    assert not_number.value.line == 2
    assert "lambda" in str(not_number.value)
    assert str(not_number.value).startswith("sweep.csv:2:")
    with pytest.raises(ParseError):
        parse_sweep_csv("")


def test_profile_json_round_trip(tmp_path):
    params = ProblemParams(3, Fraction(9, 2), 1e-3)
    profile = talenti_profile(TalentiBubble(3, 0.5), points_per_decade=40)
    result = ShootingResult(profile, profile.center_value, 7, 1e-15, ResidualReport(1e-12, 2e-12, 3e-5), Frame.RESCALED)
    stored = read_profile(write_profile(tmp_path / "profile.json", params, result))
    assert stored.params == params
    assert isinstance(stored.params.q, Fraction)
    np.testing.assert_array_equal(stored.profile.grid, profile.grid)
    np.testing.assert_array_equal(stored.profile.values, profile.values)
    np.testing.assert_array_equal(stored.profile.curvs, profile.curvs)
    assert stored.profile.tail == profile.tail
    assert stored.profile.coeffs == profile.coeffs
    assert stored.residuals == {"nehari": 1e-12, "pohozaev": 2e-12, "ode_sup": 3e-5}
    assert stored.frame == "rescaled"


def test_malformed_profile(tmp_path):
    path = tmp_path / "profile.json"
    path.write_text(json.dumps({"params": {"dim": 5, "q": "3", "lambda": 0.1}}), encoding="utf-8")
    with pytest.raises(ParseError):
        read_profile(path)


def test_json_safe_values():
    payload = to_json_safe(
        {
            "nan": math.nan,
            "inf": math.inf,
            "neg": -math.inf,
            "frac": Fraction(1, 3),
            "np": np.float64(2.5),
            "arr": np.array([1, 2]),
            "tuple": (1, 2),
        }
    )
    assert payload == {
        "nan": None,
        "inf": "infinite",
        "neg": "-infinite",
        "frac": "1/3",
        "np": 2.5,
        "arr": [1, 2],
        "tuple": [1, 2],
    }
    assert type(payload["np"]) is float


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "a": 1,\n}\n', encoding="utf-8")
    with pytest.raises(ParseError) as excinfo:
        read_json(path)
    assert excinfo.value.line == 3
    path.write_text("[1, 2]\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_json(path)


def test_atomic_write_leaves_no_temporary_files(tmp_path):
    target = tmp_path / "nested" / "out.json"
    write_json(target, {"a": 1})
    write_json(target, {"a": 2})
    assert read_json(target) == {"a": 2}
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]


def test_write_errors_and_missing_reads_are_os_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OSError):
        atomic_write_text(blocker / "out.txt", "data")
    with pytest.raises(OSError):
        read_sweep_csv(tmp_path / "missing.csv")


def test_mass_csv_round_trip(tmp_path):
    rows = [
        {"rho": 1e-6, "omega": 1e8, "m_rho": 0.1, "lambda": 1e-4, "lambda_model": 1.1e-4},
        {"rho": 2e-5, "omega": 1e6, "m_rho": 0.2, "lambda": 1e-3, "lambda_model": 0.9e-3},
    ]
    assert read_mass_csv(write_mass_csv(tmp_path / "mass.csv", rows)) == rows
