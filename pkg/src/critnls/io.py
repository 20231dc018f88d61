"""Profiles and reports as JSON, sweeps and mass tables as CSV.

JSON floats use Python's shortest round-trip repr and CSV floats are written
with 17 significant digits, so a read-back reproduces every binary64 value.
Every write goes to a temporary file in the target directory which then
replaces the destination.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from critnls.analysis.asymptotics import SweepRecord
from critnls.core.norms import INFINITE, NormSet
from critnls.core.params import Exponent, ProblemParams, parse_exponent
from critnls.errors import ParseError
from critnls.solver.profile import RadialCoefficients, RadialProfile, TailModel
from critnls.solver.shooting import ShootingResult

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["lambda", "mu0", "grad_sq", "l2_sq", "lq", "lcrit", "m_lambda", "delta", "tau", "xi", "status"]
MASS_HEADER = ["rho", "omega", "m_rho", "lambda", "lambda_model"]


# ── Low-level writers ───────────────────────────────────────────────


def atomic_write_text(path: str | Path, text: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except OSError as exc:
        Path(tmp_name).unlink(missing_ok=True)
        raise OSError(exc.errno, f"Cannot write {target}: {exc.strerror or exc}") from exc
    logger.info("Wrote %s", target)
    return target


def _read_text(path: str | Path) -> str:
    source = Path(path)
    try:
        return source.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"Cannot read {source}: {exc.strerror or exc}") from exc


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def format_exponent(q: Exponent) -> str:
    return str(q) if isinstance(q, Fraction) else repr(float(q))


def to_json_safe(value: Any) -> Any:
    """Replace non-finite floats: NaN → null, ±inf → "infinite" / "-infinite"."""
    if isinstance(value, dict):
        return {str(key): to_json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_json_safe(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return INFINITE if value > 0 else f"-{INFINITE}"
    return value


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    text = json.dumps(to_json_safe(payload), indent=2, allow_nan=False)
    return atomic_write_text(path, text + "\n")


def read_json(path: str | Path) -> dict[str, Any]:
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Invalid JSON: {exc.msg}", str(path), exc.lineno) from exc
    if not isinstance(data, dict):
        raise ParseError("Expected a JSON object at top level", str(path), 1)
    return data


# ── Profiles ────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class StoredProfile:
    params: ProblemParams
    profile: RadialProfile
    residuals: dict[str, float]
    frame: str
    flags: tuple[str, ...]


def params_as_dict(params: ProblemParams) -> dict[str, Any]:
    return {"dim": params.dim, "q": format_exponent(params.q), "lambda": params.lam}


def profile_payload(params: ProblemParams, result: ShootingResult) -> dict[str, Any]:
    profile = result.profile
    return {
        "params": params_as_dict(params),
        "dim": profile.dim,
        "mu0": result.mu0,
        "grid": profile.grid.tolist(),
        "values": profile.values.tolist(),
        "derivs": profile.derivs.tolist(),
        "second_derivs": profile.curvs.tolist(),
        "tail": profile.tail.as_dict(),
        "coeffs": profile.coeffs.as_dict(),
        "residuals": result.residual_report.as_dict(),
        "bisection_iterations": result.bisection_iterations,
        "bracket_width": result.bracket_width,
        "frame": result.frame.value,
        "flags": list(result.flags),
    }


def write_profile(path: str | Path, params: ProblemParams, result: ShootingResult) -> Path:
    return write_json(path, profile_payload(params, result))


def read_profile(path: str | Path) -> StoredProfile:
    data = read_json(path)
    try:
        raw = data["params"]
        params = ProblemParams(int(raw["dim"]), parse_exponent(str(raw["q"])), float(raw["lambda"]))
        profile = RadialProfile(
            dim=int(data["dim"]),
            grid=np.asarray(data["grid"], dtype=float),
            values=np.asarray(data["values"], dtype=float),
            derivs=np.asarray(data["derivs"], dtype=float),
            curvs=np.asarray(data["second_derivs"], dtype=float),
            tail=TailModel.from_dict(data["tail"]),
            coeffs=RadialCoefficients.from_dict(data["coeffs"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"Malformed profile: {exc}", str(path)) from exc
    return StoredProfile(
        params=params,
        profile=profile,
        residuals={key: float(value) for key, value in data.get("residuals", {}).items()},
        frame=str(data.get("frame", "")),
        flags=tuple(data.get("flags", ())),
    )


# ── Sweep CSV ───────────────────────────────────────────────────────


def _nan_if_none(value: float | None) -> float:
    return math.nan if value is None else value


def sweep_row(record: SweepRecord) -> list[str]:
    norms = record.norms_u
    columns = [
        record.lam,
        record.mu0,
        _nan_if_none(norms and norms.grad_sq),
        _nan_if_none(norms and norms.l2_sq),
        _nan_if_none(norms and norms.lq),
        _nan_if_none(norms and norms.lcrit),
        record.m_lambda,
        record.delta,
        record.tau,
        record.xi,
    ]
    return [format_float(value) for value in columns] + [record.status]


def sweep_csv_text(records: Iterable[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for record in records:
        writer.writerow(sweep_row(record))
    return buffer.getvalue()


def write_sweep_csv(path: str | Path, records: Iterable[SweepRecord]) -> Path:
    return atomic_write_text(path, sweep_csv_text(records))


def _parse_float(text: str, column: str, path: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"Column '{column}' is not a number: '{text}'", path, line) from None


def _rows(text: str, header: list[str], path: str) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError("File is empty", path, 1) from None
    if [cell.strip() for cell in first] != header:
        raise ParseError(f"Unexpected header; expected {','.join(header)}", path, 1)
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"Expected {len(header)} columns, got {len(row)}", path, line)
        yield line, row


def parse_sweep_csv(text: str, path: str = "<string>") -> list[SweepRecord]:
    records = []
    for line, row in _rows(text, SWEEP_HEADER, path):
        values = {
            column: _parse_float(cell, column, path, line) for column, cell in zip(SWEEP_HEADER[:-1], row[:-1])
        }
        status = row[-1].strip()
        norms = None
        if status == "ok":
            norms = NormSet(values["grad_sq"], values["l2_sq"], values["lq"], values["lcrit"])
        records.append(
            SweepRecord(
                lam=values["lambda"],
                mu0=values["mu0"],
                norms_u=norms,
                m_lambda=values["m_lambda"],
                delta=values["delta"],
                tau=values["tau"],
                xi=values["xi"],
                status=status,
            )
        )
    return records


def read_sweep_csv(path: str | Path) -> list[SweepRecord]:
    return parse_sweep_csv(_read_text(path), str(path))


# ── Mass table CSV ──────────────────────────────────────────────────


def write_mass_csv(path: str | Path, rows: Iterable[dict[str, float]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(MASS_HEADER)
    for row in rows:
        writer.writerow([format_float(row[column]) for column in MASS_HEADER])
    return atomic_write_text(path, buffer.getvalue())


def read_mass_csv(path: str | Path) -> list[dict[str, float]]:
    name = str(path)
    return [
        {column: _parse_float(cell, column, name, line) for column, cell in zip(MASS_HEADER, row)}
        for line, row in _rows(_read_text(path), MASS_HEADER, name)
    ]
