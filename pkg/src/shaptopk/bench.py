"""Experiment harness: declarative configs, seeded runs, CSV persistence.

Config files are flat ``key = value`` text; ``#`` starts a comment and list
values are whitespace-separated.  Recognized keys::

    games      = unanimity:8 airport:1,2,3 carrier:4,1+2 sou:6,8,7 tabular:g.game
    algorithms = cmcs independent greedy_cmcs:m_min=10 cmcs_at_k
    budgets    = 90 900            # strictly increasing checkpoint budgets
    k          = 3                 # one or more values
    runs       = 100
    base_seed  = 42
    eps        = 0.1               # PAC stopping tolerance   (pac command)
    delta      = 0.05              # PAC failure probability  (pac command)
    m_min      = 30                # default warm-up rounds for adaptive algorithms
    t_max      = 10000000          # PAC safety cap

Every run derives its seed from ``base_seed`` and the row ordinal, so output
is byte-identical regardless of execution order or parallelism; rows are
sorted before writing.  Metric columns are computed against the exact Shapley
values of each game at every checkpoint budget.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import estimators
from .errors import ConfigError
from .estimators import FixedBudget, PacMode
from .games import (
    Game,
    eligible_sets,
    exact_shapley,
    load_tabular_game,
    make_airport_game,
    make_carrier_game,
    make_random_sou_game,
    make_unanimity_game,
)
from .metrics import binary_precision, inclusion_exclusion_error, mse, ratio_precision
from .rng import RandomSource, derive_seed

CSV_COLUMNS = [
    "game", "algorithm", "n", "k", "T", "run", "seed", "budget_used",
    "eps_inc_exc", "ratio_precision", "binary_precision", "mse", "terminated_by",
]
CSV_HEADER = ",".join(CSV_COLUMNS)
PAC_CSV_COLUMNS = [
    "game", "algorithm", "n", "k", "run", "seed", "budget_used",
    "eps_inc_exc", "terminated_by",
]
PAC_CSV_HEADER = ",".join(PAC_CSV_COLUMNS)

DEFAULT_M_MIN = 30
DEFAULT_T_MAX = 10_000_000

FIXED_BUDGET_ALGORITHMS = (
    "independent",
    "same_length",
    "identical",
    "cmcs",
    "appro_shapley",
    "greedy_cmcs",
    "cmcs_at_k",
    "sampling_shap_at_k",
)
PAC_ALGORITHMS = ("cmcs_at_k", "sampling_shap_at_k")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# game and algorithm specs


def build_game(spec: str) -> Game:
    """Build a game from its textual spec, e.g. ``unanimity:8``."""
    name, _, args = spec.partition(":")
    try:
        if name == "unanimity":
            return make_unanimity_game(int(args))
        if name == "carrier":
            n_str, _, players = args.partition(",")
            return make_carrier_game(int(n_str), [int(p) for p in players.split("+") if p])
        if name == "airport":
            return make_airport_game([float(c) for c in args.split(",")])
        if name == "sou":
            n_str, terms_str, seed_str = args.split(",")
            return make_random_sou_game(int(n_str), int(terms_str), int(seed_str))
        if name == "tabular":
            return load_tabular_game(args)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad game spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown game {name!r} in spec {spec!r}")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    m_min: int | None = None

    @classmethod
    def parse(cls, spec: str) -> "AlgorithmSpec":
        name, _, args = spec.partition(":")
        if name not in FIXED_BUDGET_ALGORITHMS:
            raise ConfigError(f"unknown algorithm {name!r} in spec {spec!r}")
        m_min = None
        for item in filter(None, args.split(",")):
            key, _, val = item.partition("=")
            if key != "m_min":
                raise ConfigError(f"unknown algorithm parameter {key!r} in {spec!r}")
            try:
                m_min = int(val)
            except ValueError:
                raise ConfigError(f"bad m_min in {spec!r}") from None
        return cls(name, m_min)

    def canonical(self) -> str:
        return self.name if self.m_min is None else f"{self.name}:m_min={self.m_min}"


@dataclass
class ExperimentConfig:
    games: list[str]
    algorithms: list[str]
    budgets: list[int]
    k_values: list[int]
    runs: int
    base_seed: int
    eps: float = 0.1
    delta: float = 0.05
    m_min: int = DEFAULT_M_MIN
    t_max: int = DEFAULT_T_MAX


_LIST_KEYS = {"games", "algorithms", "budgets", "k"}
_SCALAR_KEYS = {"runs", "base_seed", "eps", "delta", "m_min", "t_max"}


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    values: dict[str, list[str]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, rest = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip()
            items = rest.split()
            if key not in _LIST_KEYS | _SCALAR_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if not items:
                raise ConfigError(f"{path}:{lineno}: key {key!r} has no value")
            if key in _SCALAR_KEYS and len(items) != 1:
                raise ConfigError(f"{path}:{lineno}: key {key!r} takes a single value")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = items

    def _require(key):
        if key not in values:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return values[key]

    def _ints(key):
        try:
            return [int(x) for x in _require(key)]
        except ValueError:
            raise ConfigError(f"{path}: key {key!r} must hold integers") from None

    cfg = ExperimentConfig(
        games=_require("games"),
        algorithms=_require("algorithms"),
        budgets=_ints("budgets"),
        k_values=_ints("k"),
        runs=_ints("runs")[0],
        base_seed=_ints("base_seed")[0],
    )
    if "eps" in values:
        cfg.eps = float(values["eps"][0])
    if "delta" in values:
        cfg.delta = float(values["delta"][0])
    if "m_min" in values:
        cfg.m_min = int(values["m_min"][0])
    if "t_max" in values:
        cfg.t_max = int(values["t_max"][0])

    if cfg.runs < 1:
        raise ConfigError(f"{path}: runs must be >= 1")
    if any(b <= 0 for b in cfg.budgets) or any(
        b <= a for a, b in zip(cfg.budgets, cfg.budgets[1:])
    ):
        raise ConfigError(f"{path}: budgets must be positive and strictly increasing")
    for spec in cfg.algorithms:
        AlgorithmSpec.parse(spec)
    for game_spec in cfg.games:
        game = build_game(game_spec)
        for k in cfg.k_values:
            if not 1 <= k <= game.n:
                raise ConfigError(
                    f"{path}: k={k} outside 1..{game.n} for game {game_spec!r}"
                )
    return cfg


# ---------------------------------------------------------------------------
# run execution


@lru_cache(maxsize=64)
def _game_truth(game_spec: str, k: int):
    game = build_game(game_spec)
    phi = exact_shapley(game)
    return game, phi, frozenset(eligible_sets(phi, k))


def _dispatch_run(game, alg: AlgorithmSpec, budget, k, seed, checkpoints, cfg_m_min,
                  pac: bool, eps: float, delta: float, t_max: int):
    rng = RandomSource(seed)
    m_min = alg.m_min if alg.m_min is not None else cfg_m_min
    name = alg.name
    if name in ("cmcs_at_k", "sampling_shap_at_k"):
        mode = PacMode(eps, delta, t_max) if pac else FixedBudget(budget)
        fn = estimators.run_cmcs_at_k if name == "cmcs_at_k" else estimators.run_sampling_shap_at_k
        return fn(game, mode, k, m_min, rng, checkpoints)
    if pac:
        raise ConfigError(f"algorithm {name!r} has no PAC stopping rule")
    if name == "greedy_cmcs":
        return estimators.run_greedy_cmcs(game, budget, k, m_min, rng, checkpoints)
    fn = getattr(estimators, f"run_{name}")
    return fn(game, budget, k, rng, checkpoints)


def _bench_task(args):
    game_spec, alg_spec, k, run_idx, seed, budgets, m_min = args
    game, phi, elig = _game_truth(game_spec, k)
    alg = AlgorithmSpec.parse(alg_spec)
    result = _dispatch_run(
        game, alg, budgets[-1], k, seed, budgets, m_min, False, 0.0, 0.0, 0
    )
    rows = []
    for cp in result.checkpoints:
        k_hat = estimators.top_k_of(cp.phi, k)
        key = (game_spec, alg.canonical(), k, cp.budget, run_idx)
        fields = [
            game_spec,
            alg.canonical(),
            str(game.n),
            str(k),
            str(cp.budget),
            str(run_idx),
            str(seed),
            str(cp.used),
            _fmt(inclusion_exclusion_error(k_hat, phi, k)),
            _fmt(ratio_precision(k_hat, elig)),
            _fmt(binary_precision(k_hat, elig)),
            _fmt(mse(phi, cp.phi)),
            result.terminated_by,
        ]
        rows.append((key, fields))
    return rows


def _pac_task(args):
    game_spec, alg_spec, k, run_idx, seed, eps, delta, m_min, t_max = args
    game, phi, _elig = _game_truth(game_spec, k)
    alg = AlgorithmSpec.parse(alg_spec)
    result = _dispatch_run(game, alg, 0, k, seed, (), m_min, True, eps, delta, t_max)
    err = inclusion_exclusion_error(result.top_k, phi, k)
    key = (game_spec, alg.canonical(), k, run_idx)
    fields = [
        game_spec,
        alg.canonical(),
        str(game.n),
        str(k),
        str(run_idx),
        str(seed),
        str(result.budget_used),
        _fmt(err),
        result.terminated_by,
    ]
    return (key, fields), err <= eps, result.budget_used


def _execute(task_fn, tasks, parallelism):
    """Yield task results in task order so partial progress survives errors."""
    if parallelism is None:
        parallelism = os.cpu_count() or 1
    if parallelism <= 1 or len(tasks) < 2:
        for task in tasks:
            yield task_fn(task)
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        yield from pool.map(
            task_fn, tasks, chunksize=max(1, len(tasks) // (8 * parallelism))
        )


def _write_rows(out_path, columns, keyed_rows, error=None):
    """Write keyed rows sorted by key; fields with commas are CSV-quoted."""
    keyed_rows.sort(key=lambda kr: kr[0])
    with Path(out_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for _key, fields in keyed_rows:
            writer.writerow(fields)
        if error is not None:
            fh.write(f"# INCOMPLETE: {error}\n")


def run_bench(config: ExperimentConfig, out_path, parallelism=None) -> int:
    """Execute the full run matrix and stream a sorted CSV; returns row count."""
    tasks = []
    ordinal = 0
    for game_spec in config.games:
        for alg_spec in config.algorithms:
            for k in config.k_values:
                for run_idx in range(config.runs):
                    seed = derive_seed(config.base_seed, ordinal)
                    tasks.append(
                        (game_spec, alg_spec, k, run_idx, seed, tuple(config.budgets),
                         config.m_min)
                    )
                    ordinal += 1
    rows: list[tuple] = []
    try:
        for chunk in _execute(_bench_task, tasks, parallelism):
            rows.extend(chunk)
    except Exception as exc:
        _write_rows(out_path, CSV_COLUMNS, rows, error=f"{type(exc).__name__}: {exc}")
        raise
    _write_rows(out_path, CSV_COLUMNS, rows)
    return len(rows)


def run_pac(config: ExperimentConfig, out_path, parallelism=None):
    """Run PAC-mode estimators until their stopping rule fires; returns a
    per-(game, algorithm) summary of call counts and empirical coverage."""
    for alg_spec in config.algorithms:
        alg = AlgorithmSpec.parse(alg_spec)
        if alg.name not in PAC_ALGORITHMS:
            raise ConfigError(
                f"pac mode supports {PAC_ALGORITHMS}, got {alg.name!r}"
            )
    tasks = []
    ordinal = 0
    for game_spec in config.games:
        for alg_spec in config.algorithms:
            for k in config.k_values:
                for run_idx in range(config.runs):
                    seed = derive_seed(config.base_seed, ordinal)
                    tasks.append(
                        (game_spec, alg_spec, k, run_idx, seed, config.eps,
                         config.delta, config.m_min, config.t_max)
                    )
                    ordinal += 1
    results = []
    try:
        for res in _execute(_pac_task, tasks, parallelism):
            results.append(res)
    except Exception as exc:
        _write_rows(out_path, PAC_CSV_COLUMNS, [r[0] for r in results],
                    error=f"{type(exc).__name__}: {exc}")
        raise
    _write_rows(out_path, PAC_CSV_COLUMNS, [r[0] for r in results])

    summary = {}
    for task, (_row, covered, calls) in zip(tasks, results):
        key = (task[0], AlgorithmSpec.parse(task[1]).canonical(), task[2])
        summary.setdefault(key, []).append((covered, calls))
    lines = []
    for (game_spec, alg_name, k), entries in sorted(summary.items()):
        calls = np.array([c for _, c in entries], dtype=np.float64)
        coverage = np.mean([1.0 if cov else 0.0 for cov, _ in entries])
        se = calls.std(ddof=1) / np.sqrt(len(calls)) if len(calls) > 1 else 0.0
        lines.append(
            f"{game_spec} {alg_name} k={k}: mean_calls={calls.mean():.1f} "
            f"se={se:.1f} coverage={coverage:.3f}"
        )
    return lines


def aggregate_metric(rows: list[dict], metric: str):
    """Group parsed CSV rows by (game, algorithm, k, T); mean and standard
    error (sample std over sqrt(count)) of the chosen metric."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["game"], row["algorithm"], int(row["k"]), int(row["T"]))
        groups.setdefault(key, []).append(float(row[metric]))
    out = {}
    for key, vals in groups.items():
        arr = np.asarray(vals)
        se = arr.std(ddof=1) / np.sqrt(len(arr)) if len(arr) > 1 else 0.0
        out[key] = (float(arr.mean()), float(se), len(arr))
    return out
