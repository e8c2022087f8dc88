#!/usr/bin/env python3
"""Regenerate the synthetic county-turnout fixture CSV.

Usage: python scripts/make_turnout_fixture.py [output.csv]

The construction is deterministic (quantile-based, no RNG), so regeneration
is byte-identical; tests/data/county_turnout.csv is the committed copy.
"""

import sys
from pathlib import Path

from bmdlimits.fixtures import write_county_fixture

DEFAULT = Path(__file__).resolve().parent.parent / "tests" / "data" / "county_turnout.csv"


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT
    out.parent.mkdir(parents=True, exist_ok=True)
    write_county_fixture(str(out))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
