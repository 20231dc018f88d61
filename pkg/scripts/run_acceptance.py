"""
Acceptance runs: sweeps, checks and controls at desk scale.

Usage:
    python scripts/run_acceptance.py                       # run all scenarios
    python scripts/run_acceptance.py --only theorem1-n5    # one scenario (repeatable)
    python scripts/run_acceptance.py --list                # show the registry
    python scripts/run_acceptance.py --check               # verify existing outputs
"""
import argparse
import json
import subprocess
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
OUT_DIR = PROJECT_ROOT / "outputs" / "acceptance"


def _out(name: str) -> str:
    return str(OUT_DIR / name)


# ── Registry of acceptance scenarios ─────────────────────────────────────────
# Each step is (CLI arguments, expected exit status); ``reports`` must say passed.
SCENARIOS = {
    "oracles": {
        "description": "Talenti quadrature against the Gamma closed forms, N = 3..6",
        "steps": [
            (["talenti", "--dim", str(n), "--q", "3" if n < 6 else "2.5", "--out", _out(f"talenti_{n}.json")], 0)
            for n in (3, 4, 5, 6)
        ],
        "talenti": [_out(f"talenti_{n}.json") for n in (3, 4, 5, 6)],
    },
    "theorem1-n5": {
        "description": "N=5, q=3: small-lambda rates, sandwiches, energy envelope and mass map",
        "steps": [
            (["sweep", "--dim", "5", "--q", "3", "--lambda-window", "1e-4:1e-1",
              "--points-per-decade", "8", "--out", _out("sweep_n5.csv")], 0),
            (["check", "--dim", "5", "--q", "3", "--input", _out("sweep_n5.csv"),
              "--report", "theorem1,corollary,mass", "--out", _out("report_n5.json")], 0),
            (["mass", "--dim", "5", "--q", "3", "--input", _out("sweep_n5.csv"), "--out", _out("mass_n5.csv")], 0),
        ],
        "reports": [_out("report_n5.json")],
    },
    "theorem1-n3": {
        "description": "N=3, q=5: rates including xi, decay envelopes",
        "steps": [
            (["sweep", "--dim", "3", "--q", "5", "--lambda-window", "1e-4:1e-1",
              "--points-per-decade", "8", "--out", _out("sweep_n3.csv")], 0),
            (["check", "--dim", "3", "--q", "5", "--input", _out("sweep_n3.csv"),
              "--lambda-window", "1e-4:1e-1", "--report", "theorem1,corollary,envelope",
              "--out", _out("report_n3.json")], 0),
        ],
        "reports": [_out("report_n3.json")],
    },
    "theorem1-n4": {
        "description": "N=4, q=3: rates with logarithmic corrections",
        "steps": [
            (["sweep", "--dim", "4", "--q", "3", "--lambda-window", "1e-5:1e-1",
              "--points-per-decade", "8", "--out", _out("sweep_n4.csv")], 0),
            (["check", "--dim", "4", "--q", "3", "--input", _out("sweep_n4.csv"),
              "--report", "theorem1", "--out", _out("report_n4.json")], 0),
        ],
        "reports": [_out("report_n4.json")],
    },
    "theorem3": {
        "description": "N=3, q=4: large-lambda H1 defect rate and prefactor",
        "steps": [
            (["sweep", "--dim", "3", "--q", "4", "--lambda-window", "10:1e4",
              "--points-per-decade", "8", "--out", _out("sweep_large.csv")], 0),
            (["check", "--dim", "3", "--q", "4", "--input", _out("sweep_large.csv"),
              "--report", "theorem3", "--out", _out("report_large.json")], 0),
        ],
        "reports": [_out("report_large.json")],
    },
    "negative-control": {
        "description": "N=3, q=3 at small lambda has no ground state",
        "steps": [
            (["solve", "--dim", "3", "--q", "3", "--lambda", "1e-3", "--out", _out("negative.json")], 20),
        ],
        "reports": [],
    },
}


def _run(args: list[str], expected: int) -> bool:
    cmd = [sys.executable, str(PROJECT_ROOT / "run.py"), *args]
    print(f"  $ {' '.join(cmd)}")
    status = subprocess.call(cmd, cwd=PROJECT_ROOT)
    if status != expected:
        print(f"  [FAIL] exit status {status}, expected {expected}")
        return False
    return True


def run_scenario(name: str) -> bool:
    info = SCENARIOS[name]
    print(f"\n{'='*60}")
    print(f"Scenario: {name} – {info['description']}")
    print(f"{'='*60}")
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    return all(_run(args, expected) for args, expected in info["steps"])


def _report_passed(path: Path) -> bool:
    try:
        return bool(json.loads(path.read_text(encoding="utf-8")).get("passed"))
    except (OSError, ValueError):
        return False


def _talenti_matches(path: Path) -> bool:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return False
    return abs(data["m0"] / data["m0_closed_form"] - 1.0) <= 1e-10


def check_outputs(names: list[str]) -> bool:
    print("\n=== Acceptance Check ===")
    all_ok = True
    for name in names:
        info = SCENARIOS[name]
        reports = [Path(p) for p in info.get("reports", [])]
        talenti = [Path(p) for p in info.get("talenti", [])]
        ok = all(_report_passed(p) for p in reports) and all(_talenti_matches(p) for p in talenti)
        all_ok = all_ok and ok
        print(f"  [{'OK' if ok else 'MISSING/FAILED'}] {name}")
    if all_ok:
        print("\nAll acceptance outputs pass.")
    else:
        print("\nSome scenarios are missing or failing. Run: python scripts/run_acceptance.py")
    return all_ok


def main() -> None:
    parser = argparse.ArgumentParser(description="Run the acceptance scenarios")
    parser.add_argument("--only", action="append", choices=sorted(SCENARIOS), help="Run only this scenario")
    parser.add_argument("--list", action="store_true", help="List scenarios and exit")
    parser.add_argument("--check", action="store_true", help="Check existing outputs only")
    args = parser.parse_args()

    if args.list:
        for name, info in SCENARIOS.items():
            print(f"  {name:18s} {info['description']}")
        return

    selected = args.only or list(SCENARIOS)
    if args.check:
        sys.exit(0 if check_outputs(selected) else 1)

    failures = [name for name in selected if not run_scenario(name)]
    print("\n=== Acceptance Complete ===")
    ok = check_outputs(selected) and not failures
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
