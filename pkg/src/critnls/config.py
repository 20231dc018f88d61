from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, fields, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

from critnls.analysis.asymptotics import lambda_grid
from critnls.analysis.checks import CheckBranch, CheckSettings
from critnls.core.params import Exponent, parse_exponent
from critnls.errors import ParseError
from critnls.solver.shooting import SolverSettings


load_dotenv()


class Command(Enum):
    """Defines what a run computes and writes.

    SOLVE   : ground state u_λ           → profile JSON + residual report
    SWEEP   : ground states over a λ-grid → sweep CSV
    CHECK   : sweep CSV (or fresh sweep)  → verification report JSON
    TALENTI : bubble norms, ρ₀, m₀        → JSON
    MASS    : exact and modelled ρ ↔ λ    → mass CSV
    SOLITON : λ → ∞ limit profile        → profile JSON
    """

    SOLVE = "solve"
    SWEEP = "sweep"
    CHECK = "check"
    TALENTI = "talenti"
    MASS = "mass"
    SOLITON = "soliton"

    @classmethod
    def from_str(cls, value: str) -> "Command":
        """Resolve a command from a case-insensitive string."""
        lookup = {c.value: c for c in cls}
        normalised = value.strip().lower()
        if normalised not in lookup:
            valid = ", ".join(sorted(lookup))
            raise ValueError(f"Unknown command '{value}'. Choose from: {valid}")
        return lookup[normalised]


def _default_jobs() -> int:
    return int(os.getenv("JOBS", str(os.cpu_count() or 1)))


@dataclass(frozen=True)
class RunConfig:
    command: str = os.getenv("COMMAND", "solve")

    # ── Problem ──
    dim: int = int(os.getenv("DIM", "5"))
    q: str = os.getenv("Q", "3")
    lam: float = float(os.getenv("LAMBDA", "1e-3"))

    # ── Sweep window ──
    lambda_window: str = os.getenv("LAMBDA_WINDOW", "1e-4:1e-1")
    points_per_decade: int = int(os.getenv("POINTS_PER_DECADE", "8"))
    jobs: int = _default_jobs()

    # ── Solver ──
    tol: float = float(os.getenv("TOL", "1e-8"))
    rtol: float = float(os.getenv("RTOL", "1e-12"))
    grid_points_per_decade: int = int(os.getenv("GRID_POINTS_PER_DECADE", "400"))
    max_bisection: int = int(os.getenv("MAX_BISECTION", "200"))

    # ── Checks ──
    report: str = os.getenv("REPORT", "theorem1")
    exponent_tol: float = float(os.getenv("EXPONENT_TOL", "0.05"))
    r_squared_floor: float = float(os.getenv("R_SQUARED_FLOOR", "0.99"))

    # ── Files ──
    out: str = os.getenv("OUT", "")
    input_path: str = os.getenv("INPUT", "")
    log_level: str = os.getenv("LOG_LEVEL", "INFO")

    # ── Derived views ──

    @property
    def mode(self) -> Command:
        return Command.from_str(self.command)

    @property
    def exponent(self) -> Exponent:
        return parse_exponent(self.q)

    @property
    def window(self) -> tuple[float, float]:
        lo, sep, hi = self.lambda_window.partition(":")
        if not sep:
            raise ValueError(f"Lambda window must look like 'lo:hi', got '{self.lambda_window}'")
        return float(lo), float(hi)

    def lambdas(self) -> list[float]:
        lo, hi = self.window
        return lambda_grid(lo, hi, self.points_per_decade)

    def branches(self) -> list[CheckBranch]:
        return [CheckBranch.from_str(name) for name in self.report.split(",") if name.strip()]

    def output_path(self) -> Path:
        if self.out:
            return Path(self.out)
        return Path("outputs") / _DEFAULT_OUTPUTS[self.mode]

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(
            rtol=self.rtol,
            points_per_decade=self.grid_points_per_decade,
            max_bisection=self.max_bisection,
        )

    def check_settings(self) -> CheckSettings:
        return CheckSettings(exponent_tol=self.exponent_tol, r_squared_floor=self.r_squared_floor)

    # ── Layering ──

    def with_overrides(self, **values: object) -> "RunConfig":
        """Replace fields whose override is not None."""
        given = {key: value for key, value in values.items() if value is not None}
        return replace(self, **given)

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None, path: str = "<string>") -> "RunConfig":
        """Apply flat ``KEY=value`` lines (``#`` comments allowed) on top of ``base``."""
        base = base or cls()
        raw = dotenv_values(stream=io.StringIO(text))
        values: dict[str, object] = {}
        for key, value in raw.items():
            name = _FIELD_BY_KEY.get(key.upper())
            if name is None:
                raise ParseError(f"Unknown config key '{key}'", path, _line_of(text, key))
            if value is None:
                raise ParseError(f"Config key '{key}' has no value", path, _line_of(text, key))
            try:
                values[name] = _CONVERTERS[name](value)
            except ValueError as exc:
                raise ParseError(f"Bad value for '{key}': {exc}", path, _line_of(text, key)) from exc
        return replace(base, **values)

    @classmethod
    def from_file(cls, path: str | Path, base: "RunConfig | None" = None) -> "RunConfig":
        source = Path(path)
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(exc.errno, f"Cannot read config {source}: {exc.strerror or exc}") from exc
        return cls.from_text(text, base, str(source))

    def to_text(self) -> str:
        lines = []
        for item in fields(self):
            value = getattr(self, item.name)
            if isinstance(value, float):
                rendered = repr(value)
            elif isinstance(value, int):
                rendered = str(value)
            else:
                rendered = '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'
            lines.append(f"{_KEY_BY_FIELD[item.name]}={rendered}")
        return "\n".join(lines) + "\n"


def _as_q(text: str) -> str:
    value = parse_exponent(text)
    return str(value) if isinstance(value, Fraction) else text.strip()


def _as_float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


_KEY_BY_FIELD = {
    "command": "COMMAND",
    "dim": "DIM",
    "q": "Q",
    "lam": "LAMBDA",
    "lambda_window": "LAMBDA_WINDOW",
    "points_per_decade": "POINTS_PER_DECADE",
    "jobs": "JOBS",
    "tol": "TOL",
    "rtol": "RTOL",
    "grid_points_per_decade": "GRID_POINTS_PER_DECADE",
    "max_bisection": "MAX_BISECTION",
    "report": "REPORT",
    "exponent_tol": "EXPONENT_TOL",
    "r_squared_floor": "R_SQUARED_FLOOR",
    "out": "OUT",
    "input_path": "INPUT",
    "log_level": "LOG_LEVEL",
}
_FIELD_BY_KEY = {key: name for name, key in _KEY_BY_FIELD.items()}

_CONVERTERS = {
    "command": lambda text: Command.from_str(text).value,
    "dim": int,
    "q": _as_q,
    "lam": _as_float,
    "lambda_window": str,
    "points_per_decade": int,
    "jobs": int,
    "tol": _as_float,
    "rtol": _as_float,
    "grid_points_per_decade": int,
    "max_bisection": int,
    "report": str,
    "exponent_tol": _as_float,
    "r_squared_floor": _as_float,
    "out": str,
    "input_path": str,
    "log_level": str,
}

_DEFAULT_OUTPUTS = {
    Command.SOLVE: "profile.json",
    Command.SWEEP: "sweep.csv",
    Command.CHECK: "report.json",
    Command.TALENTI: "talenti.json",
    Command.MASS: "mass.csv",
    Command.SOLITON: "soliton.json",
}


def _line_of(text: str, key: str) -> int:
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("export "):
            stripped = stripped[len("export "):].lstrip()
        if stripped.split("=", 1)[0].strip() == key:
            return number
    return 0
