"""Command-line front door for the plotters.

`snuca-qos-viz hr` renders per-app heart-rate panels from a trace.csv;
`snuca-qos-viz energy` renders grouped per-policy energy bars from one
or more summary.json files. Output format follows the file extension
(.png, .svg, ...).

Exit codes: 0 success, 2 bad input (schema mismatch, unreadable file),
3 unexpected runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plots import plot_energy, plot_hr

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snuca-qos-viz",
        description="Render static plots from simulator trace/summary artifacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    hr = sub.add_parser("hr", help="per-app heart-rate panels from a trace.csv")
    hr.add_argument("trace", help="path to a trace.csv")
    hr.add_argument("-o", "--out", required=True, help="output image path")

    energy = sub.add_parser("energy", help="grouped energy bars from summary.json files")
    energy.add_argument("summaries", nargs="+", help="summary.json paths")
    energy.add_argument("-o", "--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "hr":
            plot_hr(args.trace, args.out)
        else:
            plot_energy(args.summaries, args.out)
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
