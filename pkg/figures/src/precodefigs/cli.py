"""CLI: render one figure from a simulator output directory.

    precodefigs plot --in results/ --fig se|ber|csi|cost --out fig.png
"""

from __future__ import annotations

import argparse
import sys

from .curves import NoDataError, ParseError, load_curves
from .plots import plot_ber, plot_cost, plot_csi, plot_se

FIGURES = {
    "se": plot_se,
    "ber": plot_ber,
    "csi": plot_csi,
    "cost": plot_cost,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precodefigs",
        description="Render figures from precodesim curves.csv/summary.json")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one figure")
    plot.add_argument("--in", dest="input_dir", required=True,
                      help="directory containing curves.csv")
    plot.add_argument("--fig", required=True, choices=sorted(FIGURES),
                      help="which figure to render")
    plot.add_argument("--out", required=True, help="output image file (.png)")
    plot.add_argument("--rho", type=float, default=1.0,
                      help="CSI quality for the se/ber/cost figures")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        curves = load_curves(args.input_dir)
        renderer = FIGURES[args.fig]
        if args.fig == "csi":
            renderer(curves, args.out)
        else:
            renderer(curves, args.out, rho=args.rho)
    except (ParseError, NoDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.fig} figure: {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
