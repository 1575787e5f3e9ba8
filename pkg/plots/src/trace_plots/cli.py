"""Script entry point: plot --input a.csv[,b.csv] --series f,g
[--yscale linear|log] [--labels "A,B"] [--fstar X] --out fig.svg"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .render import PlotSpec, TraceFormatError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="overlay convergence curves from trace CSVs"
    )
    parser.add_argument("--input", required=True,
                        help="comma-separated list of trace CSV paths")
    parser.add_argument("--series", default="f",
                        help="comma list from f,g,dist,gap (gap = f - f*)")
    parser.add_argument("--yscale", choices=["linear", "log"], default="linear")
    parser.add_argument("--labels", help="comma list, one label per input "
                        "(defaults to the file stems)")
    parser.add_argument("--fstar", type=float, help="optimal value for the gap series")
    parser.add_argument("--out", required=True, help="output image (.svg default idiom)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    inputs = tuple(p.strip() for p in args.input.split(",") if p.strip())
    if args.labels:
        labels = tuple(l.strip() for l in args.labels.split(","))
    else:
        labels = tuple(Path(p).stem for p in inputs)
    series = tuple(s.strip() for s in args.series.split(",") if s.strip())
    try:
        spec = PlotSpec(
            inputs=inputs,
            series=series,
            labels=labels,
            output=args.out,
            y_scale=args.yscale,
            f_star=args.fstar,
        )
        render(spec)
    except (TraceFormatError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
