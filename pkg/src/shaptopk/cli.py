"""Command-line interface: ``exact``, ``bench``, and ``pac`` subcommands."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .errors import ShapTopkError
from .games import eligible_sets, exact_shapley, exact_shapley_extended
from .metrics import MAX_MOMENTS_N, exact_moments


def _cmd_exact(args) -> int:
    game = bench_mod.build_game(args.game)
    if game.n > MAX_MOMENTS_N:
        raise ShapTopkError(f"exact inspection supports n <= {MAX_MOMENTS_N}")
    phi = exact_shapley(game)
    phi_ext = exact_shapley_extended(game)
    print(f"game: {game.label} (n={game.n})")
    print("player  phi                      phi(symmetric-difference)")
    for idx in range(game.n):
        print(f"{idx + 1:<7d} {phi[idx]:<24.17g} {phi_ext[idx]:.17g}")
    print(f"max |difference| = {np.abs(phi - phi_ext).max():.3g}")
    print(f"sum phi = {phi.sum():.17g}  (grand coalition worth = "
          f"{game.value(game.grand_mask):.17g})")
    print("eligible sets:")
    for k in range(1, game.n + 1):
        sets = sorted(e.players() for e in eligible_sets(phi, k))
        rendered = " ".join("{" + ",".join(map(str, s)) + "}" for s in sets)
        print(f"  k={k}: {rendered}")
    moments = exact_moments(game)
    print("per-player observation variance (shared-round law / isolated law):")
    for idx in range(game.n):
        print(f"  player {idx + 1}: {moments.var[idx]:.12g} / "
              f"{moments.var_isolated[idx]:.12g}")
    print("pairwise covariance (shared-round law):")
    for i in range(game.n):
        row = " ".join(f"{moments.cov[i, j]: .9g}" for j in range(game.n))
        print(f"  {row}")
    return 0


def _cmd_bench(args) -> int:
    config = bench_mod.parse_config(args.config)
    if args.base_seed is not None:
        config.base_seed = args.base_seed
    count = bench_mod.run_bench(config, args.out, args.parallelism)
    print(f"wrote {count} rows to {args.out}")
    return 0


def _cmd_pac(args) -> int:
    config = bench_mod.parse_config(args.config)
    if args.base_seed is not None:
        config.base_seed = args.base_seed
    summary = bench_mod.run_pac(config, args.out, args.parallelism)
    for line in summary:
        print(line)
    print(f"wrote per-run rows to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shaptopk",
        description="Budget-limited Shapley estimation and top-k identification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="print exact values, eligible sets, moments")
    p_exact.add_argument("--game", required=True, help="game spec, e.g. unanimity:4")
    p_exact.set_defaults(fn=_cmd_exact)

    p_bench = sub.add_parser("bench", help="run a fixed-budget experiment matrix")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--parallelism", type=int, default=None)
    p_bench.add_argument("--base-seed", type=int, default=None)
    p_bench.set_defaults(fn=_cmd_bench)

    p_pac = sub.add_parser("pac", help="run PAC-mode estimators until they stop")
    p_pac.add_argument("--config", required=True)
    p_pac.add_argument("--out", required=True)
    p_pac.add_argument("--parallelism", type=int, default=None)
    p_pac.add_argument("--base-seed", type=int, default=None)
    p_pac.set_defaults(fn=_cmd_pac)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ShapTopkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
