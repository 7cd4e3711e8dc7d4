#!/usr/bin/env python3
"""Run the three shipped GaN/AlN structures through every scenario.

Writes transmission, spectrum, profile and correlated-area exports for
n11/n51/n101 into out/<name>/. Deterministic; takes a few minutes at the
config grid sizes.
"""

import argparse
import sys
from pathlib import Path

from spdclayers.runconfig import load_config
from spdclayers.scenarios import SCENARIO_RUNNERS

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "spdclayers" / "configs"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="output root directory")
    ap.add_argument("--structures", nargs="*", default=["n11", "n51", "n101"])
    ap.add_argument("--scenarios", nargs="*",
                    default=["transmission", "spectrum", "profile", "corr-area"])
    args = ap.parse_args()

    for name in args.structures:
        cfg = load_config(CONFIGS / f"{name}.cfg")
        for scenario in args.scenarios:
            out_dir = Path(args.out) / name
            paths = SCENARIO_RUNNERS[scenario](cfg, out_dir)
            for p in paths:
                print(f"{name} {scenario}: {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
