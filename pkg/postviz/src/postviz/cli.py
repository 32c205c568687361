"""Batch entry points: turn run directories into figures and tables."""

from __future__ import annotations

import argparse
import sys

from .figures import plot_enstrophy, plot_field
from .rundir import RunDirectoryError
from .tables import ReportError, write_table


def _parse_window(raw):
    if raw is None:
        return None
    parts = [float(v) for v in raw.split(",")]
    if len(parts) != 2:
        raise ValueError(f"window must be 'start,end', got {raw!r}")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postviz",
        description="Figures and tables from solver run directories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enstrophy", help="overlaid enstrophy histories with zoom panels")
    p.add_argument("run_dirs", nargs="+", help="one or more run directories")
    p.add_argument("--out", required=True, help="output image path (png/svg)")
    p.add_argument("--window", help="main panel window 'start,end'")
    p.add_argument("--zoom", help="zoom panel window 'start,end'")
    p.set_defaults(func=cmd_enstrophy)

    p = sub.add_parser("field", help="heatmap of one field dump")
    p.add_argument("run_dir", help="run directory")
    p.add_argument("name", help="field name (q1, psi1, ...) or relative .fld path")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--diff-with", help="second run directory: plot |difference|")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("table", help="render a convergence CSV as a text table")
    p.add_argument("csv", help="convergence report CSV")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_table)

    return parser


def cmd_enstrophy(args) -> int:
    out = plot_enstrophy(
        args.run_dirs, args.out,
        window=_parse_window(args.window), zoom=_parse_window(args.zoom),
    )
    print(out)
    return 0


def cmd_field(args) -> int:
    out = plot_field(args.run_dir, args.name, args.out, diff_with=args.diff_with)
    print(out)
    return 0


def cmd_table(args) -> int:
    if args.out:
        print(write_table(args.csv, args.out))
    else:
        from .tables import table_report

        print(table_report(args.csv), end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RunDirectoryError, ReportError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
