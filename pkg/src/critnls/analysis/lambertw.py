"""Principal branch W₀ of the Lambert function on x ≥ 0."""

from __future__ import annotations

import math

from critnls.errors import DomainError, ToleranceNotReached

MAX_HALLEY = 50
MAX_BISECTION = 400


def _seed(x: float) -> float:
    if x < 0.5:
        return x * (1.0 - x + 1.5 * x * x)
    if x >= 3.0:
        log_x = math.log(x)
        return log_x - math.log(log_x)
    return math.log1p(x)


def _residual(y: float, x: float) -> float:
    return y * math.exp(y) - x


def lambert_w0(x: float, tol: float = 1e-13) -> float:
    """y ≥ 0 with y·e^y = x, to |y e^y − x| ≤ tol·x.

    Halley iteration from a series / asymptotic seed; bisection on
    [0, ln(1+x)] takes over if Halley stalls.
    """
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"lambert_w0 requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    # relative to x: near 0, W(x) ≈ x and an absolute bound accepts the bare seed
    bound = tol * x

    y = _seed(x)
    for _ in range(MAX_HALLEY):
        ey = math.exp(y)
        f = y * ey - x
        if f == 0.0:
            return y
        y1 = y + 1.0
        step = f / (ey * y1 - (y + 2.0) * f / (2.0 * y1))
        y -= step
        if y < 0.0:
            y = 0.5 * (y + step)
        if abs(step) <= 4.0 * math.ulp(y):
            break
    if abs(_residual(y, x)) <= bound:
        return y

    lo, hi = 0.0, math.log1p(x)
    for _ in range(MAX_BISECTION):
        mid = 0.5 * (lo + hi)
        f = _residual(mid, x)
        if abs(f) <= bound:
            return mid
        if f > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 4.0 * math.ulp(hi):
            break
    # the bracket is at floating-point resolution; accept its better end
    best = min((lo, hi), key=lambda y_: abs(_residual(y_, x)))
    if abs(_residual(best, x)) > 64.0 * bound:
        raise ToleranceNotReached(f"lambert_w0({x!r}) did not reach tolerance {tol:.1e}")
    return best
