"""Command-line front end.

Subcommands: transmission, spectrum, profile, corr-area, design-sweep,
validate. Outputs are deterministic data files written atomically under
--out; failures print a machine-readable error JSON to stdout and exit with
2 (config), 3 (I/O) or 4 (computation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_COMPUTE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdclayers",
        description="Photon-pair generation in nonlinear layered structures")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("transmission", "TE/TM intensity transmission vs angle or frequency"),
        ("spectrum", "relative signal density over (frequency, angle)"),
        ("profile", "frequency-integrated transverse emission profile"),
        ("corr-area", "correlated idler area for one signal direction"),
        ("design-sweep", "efficiency sweep over the optical-length ratio"),
        ("validate", "validate a run config and exit"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="run config file (TOML)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="cap worker threads of the numeric backend")
        p.add_argument("--grid", default=None, metavar="WxH",
                       help="override the scenario's main grid resolution")
    return parser


def _fail(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": {"code": kind, "exit": code, "message": message, **extra}}
    print(json.dumps(payload, sort_keys=True))
    return code


def _parse_grid(text):
    if text is None:
        return None
    try:
        w, _, h = text.partition("x")
        return (int(w), int(h)) if h else (int(w),)
    except ValueError:
        raise ValueError(f"--grid must look like 256x128, got {text!r}") from None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(max(1, args.threads))

    try:
        grid = _parse_grid(args.grid)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), key="grid")

    from .errors import SpdcLayersError
    from .runconfig import ConfigError, load_config
    from .scenarios import SCENARIO_RUNNERS

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), key=exc.key)
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except SpdcLayersError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    if args.command == "validate":
        print(json.dumps({"ok": True, "config": os.path.basename(args.config),
                          "sections": sorted(cfg.raw)}, sort_keys=True))
        return 0

    runner = SCENARIO_RUNNERS[args.command]
    overrides = {"grid": grid} if grid else {}
    try:
        paths = runner(cfg, args.out, overrides)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), key=exc.key)
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except SpdcLayersError as exc:
        return _fail(EXIT_COMPUTE, "compute", str(exc))
    print(json.dumps({"ok": True, "outputs": [str(p) for p in paths]}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
