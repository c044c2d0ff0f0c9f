"""Command line: `fairsample-plot <kind> --in ... --out base`.

Writes `<base>.svg` and `<base>.png`; schema violations exit nonzero with
the reason on stderr and no partial output.
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairsample-plot",
        description="Render figures from fair-sampling experiment outputs.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"render a {kind} figure")
        p.add_argument("--in", dest="inputs", action="append", required=True,
                       metavar="CSV", help="input file (repeatable)")
        p.add_argument("--out", required=True,
                       help="output base path (writes .svg and .png)")
        p.add_argument("--label", dest="labels", action="append",
                       help="curve label, one per input (rank figures)")
        p.add_argument("--title", default="")
        if kind == "trace":
            p.add_argument("--columns", default=None,
                           help="JSON sidecar mapping p_i to bitstrings")
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=tuple(args.inputs),
        out=args.out,
        columns=getattr(args, "columns", None),
        labels=tuple(args.labels) if args.labels else None,
        title=args.title,
    )
    try:
        svg, png = render(spec)
    except SchemaError as exc:
        print(f"fairsample-plot: {exc}", file=sys.stderr)
        sys.exit(1)
    print(f"wrote {svg} and {png}")


if __name__ == "__main__":
    main()
