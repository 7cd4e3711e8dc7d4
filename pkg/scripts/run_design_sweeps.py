#!/usr/bin/env python3
"""Efficiency sweeps over the optical-length ratio for N = 11 and N = 101.

Reproduces the design-curve comparison of the shipped structures: the flat
lower-peak curve of the short stack against the upper-peak curve of the long
one. Writes sweep.csv / sweep_top.json per structure into out/sweeps/.
"""

import argparse
import sys
from pathlib import Path

from spdclayers.runconfig import load_config
from spdclayers.scenarios import run_design_sweep

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "spdclayers" / "configs"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/sweeps")
    ap.add_argument("--structures", nargs="*", default=["n11", "n101"])
    args = ap.parse_args()
    for name in args.structures:
        cfg = load_config(CONFIGS / f"{name}.cfg")
        paths = run_design_sweep(cfg, Path(args.out) / name)
        for p in paths:
            print(f"{name}: {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
