"""Command-line figure rendering.

Usage: plotkit <kind> --csv data.csv [--csv more.csv ...] --out fig.svg
               [--group-by method,M] [--guides 2,4,8] [--title ...]

Exit codes: 0 on success, 2 on bad arguments or unusable CSV input.
"""

import argparse
import sys

from .core import PLOT_KINDS, EmptyDataError, MissingColumnError, PlotSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render benchmark CSVs as paper-style figures.")
    parser.add_argument("kind", choices=PLOT_KINDS)
    parser.add_argument("--csv", action="append", required=True,
                        dest="csv_paths", metavar="PATH",
                        help="input CSV (repeatable)")
    parser.add_argument("--out", required=True,
                        help="output image path (.svg or .png)")
    parser.add_argument("--group-by", default=None, metavar="COLS",
                        help="comma-separated grouping columns "
                             "(default: the method/M/iteration columns "
                             "present in the file)")
    parser.add_argument("--guides", default="2,4,8", metavar="P,P,...",
                        help="reference slopes for convergence plots; "
                             "empty string disables them")
    parser.add_argument("--x-label", default=None)
    parser.add_argument("--y-label", default=None)
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        guides = tuple(float(p) for p in args.guides.split(",") if p.strip())
    except ValueError:
        print("invalid --guides value: %r" % args.guides, file=sys.stderr)
        return 2
    spec = PlotSpec(
        csv_paths=args.csv_paths,
        kind=args.kind,
        out_path=args.out,
        group_by=args.group_by.split(",") if args.group_by else None,
        guides=guides,
        x_label=args.x_label,
        y_label=args.y_label,
        title=args.title,
    )
    try:
        result = render(spec)
    except (MissingColumnError, EmptyDataError, OSError) as exc:
        print("plotkit: %s" % exc, file=sys.stderr)
        return 2
    print(result.out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
