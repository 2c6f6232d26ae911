"""Regenerate docs/checks.md from the check registry."""

import argparse
from pathlib import Path

from bistackel.checks import catalog_markdown


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="docs/checks.md")
    args = ap.parse_args()
    Path(args.out).write_text(catalog_markdown())
    print(args.out)


if __name__ == "__main__":
    main()
