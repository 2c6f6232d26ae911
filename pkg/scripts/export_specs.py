"""Write every built-in system as a spec file.

    python3 scripts/export_specs.py [--out specs]
"""

import argparse
from pathlib import Path

from bistackel.corpus import builtin_systems
from bistackel.specfile import save_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="specs")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, system in builtin_systems().items():
        save_spec(system, out / f"{name}.spec")
        print(out / f"{name}.spec")


if __name__ == "__main__":
    main()
