"""spdcplot command line: render one export file into one image."""

from __future__ import annotations

import argparse
import sys

from .reader import ExportError
from .render import KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spdcplot", description="Render spdclayers exports as figures")
    parser.add_argument("kind", choices=sorted(KINDS), help="plot style")
    parser.add_argument("input", help="exported CSV file")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.input, args.output)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
