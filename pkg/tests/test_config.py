from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from critnls.analysis.checks import CheckBranch
from critnls.config import Command, RunConfig
from critnls.errors import ParseError

BASE = RunConfig(
    command="solve",
    dim=5,
    q="3",
    lam=1e-3,
    lambda_window="1e-4:1e-1",
    points_per_decade=8,
    jobs=1,
    tol=1e-8,
    rtol=1e-12,
    grid_points_per_decade=400,
    max_bisection=200,
    report="theorem1",
    exponent_tol=0.05,
    r_squared_floor=0.99,
    out="",
    input_path="",
    log_level="INFO",
)


def test_command_parsing():
    assert Command.from_str(" SWEEP ") is Command.SWEEP
    with pytest.raises(ValueError):
        Command.from_str("plot")


@pytest.mark.parametrize(
    "config",
    [
        BASE,
        RunConfig(
            command="sweep",
            dim=3,
            q="7/2",
            lam=0.25,
            lambda_window="1e-5:1e-2",
            points_per_decade=9,
            jobs=3,
            tol=1e-9,
            rtol=1e-11,
            grid_points_per_decade=300,
            max_bisection=150,
            report="theorem1,mass",
            exponent_tol=0.04,
            r_squared_floor=0.995,
            out="runs/out file.csv",
            input_path="runs/sweep.csv",
            log_level="DEBUG",
        ),
    ],
)
def test_text_round_trip(config):
    assert RunConfig.from_text(config.to_text(), base=BASE) == config


def test_rational_exponent_stays_exact():
    config = RunConfig.from_text("Q=14/4\n", base=BASE)
    assert config.q == "7/2"
    assert config.exponent == Fraction(7, 2)
    assert RunConfig.from_text("Q=2.5\n", base=BASE).exponent == 2.5


def test_comments_and_export_prefix():
    config = RunConfig.from_text("# run settings\nexport DIM=6\n\nLAMBDA=0.5  # inline\n", base=BASE)
    assert config.dim == 6
    assert config.lam == 0.5
    assert config.q == BASE.q


@pytest.mark.parametrize(
    "text, line",
    [
        ("DIM=4\nCOLOUR=blue\n", 2),
        ("DIM=4\n# note\nLAMBDA=abc\n", 3),
        ("LAMBDA=nan\n", 1),
        ("Q=7/0\n", 1),
        ("COMMAND=plot\n", 1),
        ("DIM\n", 1),
    ],
)
def test_bad_lines_raise_parse_error_with_line(text, line):
    with pytest.raises(ParseError) as excinfo:
        RunConfig.from_text(text, base=BASE, path="run.cfg")
    assert excinfo.value.line == line
    assert excinfo.value.path == "run.cfg"


def test_window_and_lambdas():
    config = BASE.with_overrides(lambda_window="1e-4:1e-2", points_per_decade=8)
    assert config.window == (1e-4, 1e-2)
    assert len(config.lambdas()) == 17
    with pytest.raises(ValueError):
        _ = BASE.with_overrides(lambda_window="1e-4").window


def test_branches():
    config = BASE.with_overrides(report="theorem1, mass,")
    assert config.branches() == [CheckBranch.THEOREM1, CheckBranch.MASS]


def test_overrides_ignore_none():
    config = BASE.with_overrides(dim=None, lam=0.5)
    assert config.dim == BASE.dim
    assert config.lam == 0.5


def test_derived_settings():
    config = BASE.with_overrides(rtol=1e-10, grid_points_per_decade=200, max_bisection=50, exponent_tol=0.02)
    solver = config.solver_settings()
    assert (solver.rtol, solver.points_per_decade, solver.max_bisection) == (1e-10, 200, 50)
    assert config.check_settings().exponent_tol == 0.02
    assert config.check_settings().r_squared_floor == 0.99


@pytest.mark.parametrize(
    "command, name",
    [("solve", "profile.json"), ("sweep", "sweep.csv"), ("check", "report.json"), ("mass", "mass.csv")],
)
def test_default_output_paths(command, name):
    assert BASE.with_overrides(command=command).output_path() == Path("outputs") / name
    assert BASE.with_overrides(command=command, out="x/y.out").output_path() == Path("x/y.out")


def test_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("DIM=4\nQ=3\n", encoding="utf-8")
    config = RunConfig.from_file(path, base=BASE)
    assert (config.dim, config.q) == (4, "3")
    with pytest.raises(OSError):
        RunConfig.from_file(tmp_path / "missing.cfg", base=BASE)
