"""CLI for rendering benchmark curves from a harness CSV."""

from __future__ import annotations

import argparse
import sys

from .curves import CurveSpec, EmptySelection, SchemaError
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shaptopk-plot",
        description="Plot metric curves with standard-error bands from a "
                    "shaptopk benchmark CSV",
    )
    parser.add_argument("--csv", required=True, help="benchmark CSV path")
    parser.add_argument("--x", required=True, choices=("T", "k"))
    parser.add_argument("--metric", required=True,
                        choices=("eps_inc_exc", "ratio_precision",
                                 "binary_precision", "mse"))
    parser.add_argument("--game", required=True, help="game label to filter on")
    parser.add_argument("--k", type=int, default=None, help="fixed k (when --x T)")
    parser.add_argument("--T", type=int, default=None, help="fixed T (when --x k)")
    parser.add_argument("--out", required=True, help="output image (.svg or .png)")
    parser.add_argument("--logy", action="store_true", help="log-scale the y axis")
    args = parser.parse_args(argv)

    try:
        spec = CurveSpec(args.x, args.metric, args.game, k=args.k, T=args.T)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        curves = render(args.csv, spec, args.out, logy=args.logy)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmptySelection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(curves)} curves)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
