"""Run the verification battery on every built-in system.

Writes one JSON report per system and prints the worst residual of each
check.  Exit status 1 if any check fails.
"""

import argparse
import json
import sys
from pathlib import Path

from bistackel import checks
from bistackel.cli import verify_report
from bistackel.corpus import builtin_systems


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=checks.DEFAULT_SAMPLES)
    ap.add_argument("--seed", type=int, default=checks.DEFAULT_SEED)
    ap.add_argument("--out", default="reports")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    for name, system in builtin_systems().items():
        rep = verify_report(system, args.samples, args.seed)
        (out / f"{name}.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
        ok &= rep["passed"]
        top = max(rep["checks"], key=lambda r: r["max_residual"] / r["tolerance"])
        print(f"{'PASS' if rep['passed'] else 'FAIL'}  {name:<14} worst {top['id']} "
              f"{top['max_residual']:.1e} (tol {top['tolerance']:.0e})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
