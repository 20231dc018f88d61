"""Exception hierarchy shared by the library and the CLI.

Every class carries a distinct ``exit_code`` so ``critnls.cli.main`` can map a
failure to a documented process status without string matching.
"""

from __future__ import annotations


class CritNLSError(Exception):
    """Base class for all errors raised by critnls."""

    exit_code: int = 99


# ── Parameter errors ────────────────────────────────────────────────


class DimensionError(CritNLSError, ValueError):
    exit_code = 10


class ExponentRangeError(CritNLSError, ValueError):
    exit_code = 11


class DivergentNormError(CritNLSError, ValueError):
    exit_code = 12


class DomainError(CritNLSError, ValueError):
    exit_code = 13


# ── Solver errors ───────────────────────────────────────────────────


class NoDecayingSolution(CritNLSError, RuntimeError):
    """The shooting bracket never straddled an overshoot/undershoot change."""

    exit_code = 20


class ToleranceNotReached(CritNLSError, RuntimeError):
    exit_code = 21


class DegenerateProfileError(CritNLSError, RuntimeError):
    exit_code = 22


# ── Asymptotic analysis errors ──────────────────────────────────────


class RescaleError(CritNLSError, ValueError):
    exit_code = 30


class NotConcentratedError(CritNLSError, RuntimeError):
    exit_code = 31


class FitError(CritNLSError, RuntimeError):
    exit_code = 32


class InsufficientDecades(CritNLSError, ValueError):
    exit_code = 33


class EnvelopeViolation(CritNLSError, RuntimeError):
    exit_code = 34


# ── I/O ─────────────────────────────────────────────────────────────


class ParseError(CritNLSError, ValueError):
    """Malformed input file; ``line`` is 1-based, 0 when not line-specific."""

    exit_code = 40

    def __init__(self, message: str, path: str = "", line: int = 0) -> None:
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(f"{where}{message}")


EXIT_CHECKS_FAILED = 1
EXIT_IO_ERROR = 50


def exit_code_table() -> dict[str, int]:
    """Name → exit code for every concrete error class."""
    table = {"ChecksFailed": EXIT_CHECKS_FAILED, "OSError": EXIT_IO_ERROR}
    stack = list(CritNLSError.__subclasses__())
    while stack:
        cls = stack.pop()
        table[cls.__name__] = cls.exit_code
        stack.extend(cls.__subclasses__())
    return table
