"""
critnls CLI entry-point.

Commands (first positional argument):

* ``solve``   – ground state at one λ         (``--dim --q --lambda``)
* ``soliton`` – λ → ∞ limit profile           (``--dim --q``)
* ``sweep``   – ground states over a λ-window (``--lambda-window a:b --points-per-decade``)
* ``check``   – verification report           (``--input sweep.csv --report theorem1,mass``)
* ``talenti`` – bubble norms, ρ₀ and m₀       (``--dim --q``)
* ``mass``    – ρ ↔ λ table                   (``--input sweep.csv`` or a fresh sweep)

Values come from the environment (``.env``), then ``--config FILE``
(flat KEY=value lines), then the flags below.  The process exit status is 0
on success, 1 when a check fails, and the error's ``exit_code`` otherwise.
"""

from __future__ import annotations

import argparse
import logging
import sys

from critnls.config import Command, RunConfig
from critnls.core.params import parse_exponent
from critnls.errors import EXIT_CHECKS_FAILED, EXIT_IO_ERROR, CritNLSError
from critnls.pipeline import HarnessPipeline, RunResult
from critnls.utils.logging import setup_logging

logger = logging.getLogger(__name__)

_COMMAND_CHOICES = [c.value for c in Command]


def _exponent_text(value: str) -> str:
    try:
        parse_exponent(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="critnls: ground states of -Δu + u = u^(2*-1) + λu^(q-1) and their asymptotics",
    )
    parser.add_argument("command", choices=_COMMAND_CHOICES, help="What to compute.")
    parser.add_argument("--config", type=str, default=None, help="Flat KEY=value config file.")
    parser.add_argument("--dim", type=int, default=None, help="Space dimension N >= 3.")
    parser.add_argument(
        "--q",
        type=_exponent_text,
        default=None,
        help="Subcritical exponent, 2 < q < 2N/(N-2); 'a/b' is kept exact.",
    )
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="Coefficient λ > 0.")
    parser.add_argument("--lambda-window", type=str, default=None, help="Sweep window 'lo:hi'.")
    parser.add_argument("--points-per-decade", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None, help="Residual tolerance for certified solves.")
    parser.add_argument("--out", type=str, default=None, help="Output file (default under ./outputs).")
    parser.add_argument("--jobs", type=int, default=None, help="Parallel sweep workers.")
    parser.add_argument(
        "--report",
        type=str,
        default=None,
        help="Comma-separated check branches: theorem1, theorem3, corollary, envelope, mass.",
    )
    parser.add_argument("--input", dest="input_path", type=str, default=None, help="Sweep CSV to read.")
    parser.add_argument("--log-level", type=str, default=None)
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    # environment < config file < flags
    config = RunConfig()
    if args.config:
        config = RunConfig.from_file(args.config, base=config)
    return config.with_overrides(
        command=args.command,
        dim=args.dim,
        q=args.q,
        lam=args.lam,
        lambda_window=args.lambda_window,
        points_per_decade=args.points_per_decade,
        tol=args.tol,
        out=args.out,
        jobs=args.jobs,
        report=args.report,
        input_path=args.input_path,
        log_level=args.log_level,
    )


def _print_result(result: RunResult) -> None:
    for path in result.outputs:
        print(f"Wrote: {path}")
    if result.command is Command.CHECK:
        print("Checks: PASS" if result.passed else f"Checks: FAIL {result.summary.get('failing', {})}")


# ── Main ────────────────────────────────────────────────────────────

def main(argv: list[str] | None = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)

    try:
        config = build_config(args)
        setup_logging(config.log_level)
        result = HarnessPipeline(config).run()
    except CritNLSError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO_ERROR
    except ValueError as exc:
        # bad enum names and malformed windows outside the library hierarchy
        logger.error("Invalid configuration: %s", exc)
        return 2

    _print_result(result)
    return 0 if result.passed else EXIT_CHECKS_FAILED


if __name__ == "__main__":
    sys.exit(main())
