"""Power-law fits  y ≈ c · λ^a · (ln 1/λ)^β  in log space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import stats

from critnls.errors import FitError

MIN_POINTS = 6


@dataclass(frozen=True)
class LogPowerMode:
    """``fixed=None`` fits β freely; otherwise β is held at ``fixed``."""

    fixed: float | None = None

    @classmethod
    def free(cls) -> "LogPowerMode":
        return cls(None)

    @classmethod
    def pinned(cls, beta: float) -> "LogPowerMode":
        return cls(float(beta))

    @property
    def is_free(self) -> bool:
        return self.fixed is None


@dataclass(frozen=True)
class FitResult:
    exponent: float
    log_power: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]

    def as_dict(self) -> dict[str, float | list[float]]:
        return {
            "exponent": self.exponent,
            "log_power": self.log_power,
            "prefactor": self.prefactor,
            "r_squared": self.r_squared,
            "window": list(self.window),
        }


def _clean(points: Iterable[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray([(float(x), float(y)) for x, y in points], dtype=float)
    if data.ndim != 2 or data.shape[0] < MIN_POINTS:
        raise FitError(f"A power-law fit needs at least {MIN_POINTS} points, got {len(data)}")
    lam, y = data[:, 0], data[:, 1]
    if np.any(~np.isfinite(data)):
        raise FitError("Fit data contains non-finite values")
    if np.any(lam <= 0.0) or np.any(lam >= 1.0):
        raise FitError("Fit abscissae must lie in (0, 1)")
    if np.any(y <= 0.0):
        raise FitError("Fit ordinates must be positive")
    return lam, y


def fit_power_law(points: Iterable[tuple[float, float]], mode: LogPowerMode = LogPowerMode.free()) -> FitResult:
    lam, y = _clean(points)
    log_lam = np.log(lam)
    log_log = np.log(np.log(1.0 / lam))
    log_y = np.log(y)
    window = (float(lam.min()), float(lam.max()))

    if not mode.is_free:
        beta = float(mode.fixed)
        if np.ptp(log_lam) == 0.0:
            raise FitError("Degenerate design: all abscissae coincide")
        result = stats.linregress(log_lam, log_y - beta * log_log)
        return FitResult(
            exponent=float(result.slope),
            log_power=beta,
            prefactor=math.exp(result.intercept),
            r_squared=float(result.rvalue**2),
            window=window,
        )

    design = np.column_stack((log_lam, log_log, np.ones_like(log_lam)))
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("Degenerate design: log λ and log log(1/λ) are not independent")
    coef, *_ = np.linalg.lstsq(design, log_y, rcond=None)
    fitted = design @ coef
    total = float(np.sum((log_y - log_y.mean()) ** 2))
    residual = float(np.sum((log_y - fitted) ** 2))
    r_squared = 1.0 if total == 0.0 else max(0.0, 1.0 - residual / total)
    return FitResult(
        exponent=float(coef[0]),
        log_power=float(coef[1]),
        prefactor=math.exp(coef[2]),
        r_squared=r_squared,
        window=window,
    )


def half_window_gap(points: list[tuple[float, float]], mode: LogPowerMode) -> float | None:
    """|a_lower − a_upper| between fits on the two halves of the window.

    ``None`` when a half has too few points to fit.
    """
    ordered = sorted(points)
    middle = len(ordered) // 2
    lower, upper = ordered[: middle + 1], ordered[middle:]
    if len(lower) < MIN_POINTS or len(upper) < MIN_POINTS:
        return None
    try:
        return abs(fit_power_law(lower, mode).exponent - fit_power_law(upper, mode).exponent)
    except FitError:
        return None
