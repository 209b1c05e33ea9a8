"""Load benchmark CSVs and aggregate metric curves.

The input schema is the harness CSV: one row per (game, algorithm, k,
checkpoint budget, run) with metric columns.  A curve spec fixes the game and
one of k or T, picks the other as the x-axis, and groups rows by algorithm;
every (x, algorithm) cell aggregates its runs to a mean and a standard error
(sample standard deviation over sqrt(count)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

METRICS = ("eps_inc_exc", "ratio_precision", "binary_precision", "mse")
REQUIRED_COLUMNS = {"game", "algorithm", "n", "k", "T", "run"} | set(METRICS)


class SchemaError(Exception):
    """The CSV is missing columns the curve spec needs."""


class EmptySelection(Exception):
    """The curve spec's filter matches no rows."""


@dataclass(frozen=True)
class CurveSpec:
    """What to plot: ``x`` is 'T' (then ``k`` is fixed) or 'k' (then ``T``)."""

    x: str
    metric: str
    game: str
    k: int | None = None
    T: int | None = None

    def __post_init__(self):
        if self.x not in ("T", "k"):
            raise ValueError(f"x must be 'T' or 'k', got {self.x!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.x == "T" and self.k is None:
            raise ValueError("x='T' requires a fixed k")
        if self.x == "k" and self.T is None:
            raise ValueError("x='k' requires a fixed T")


class Curve(NamedTuple):
    xs: np.ndarray
    means: np.ndarray
    ses: np.ndarray
    counts: np.ndarray


def load_rows(csv_path) -> list[dict]:
    """Parse the CSV, skipping ``#`` comment/trailer lines."""
    path = Path(csv_path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    reader = csv.DictReader(lines)
    missing = REQUIRED_COLUMNS - set(reader.fieldnames or ())
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    return list(reader)


def compute_curves(rows: list[dict], spec: CurveSpec) -> dict[str, Curve]:
    """Aggregate one curve per algorithm under the spec's filter."""
    fixed_col, fixed_val = ("k", spec.k) if spec.x == "T" else ("T", spec.T)
    selected = [
        r for r in rows
        if r["game"] == spec.game and int(r[fixed_col]) == int(fixed_val)
    ]
    if not selected:
        raise EmptySelection(
            f"no rows for game={spec.game!r} with {fixed_col}={fixed_val}"
        )
    groups: dict[str, dict[int, list[float]]] = {}
    for r in selected:
        x = int(r[spec.x])
        groups.setdefault(r["algorithm"], {}).setdefault(x, []).append(
            float(r[spec.metric])
        )
    curves = {}
    for alg in sorted(groups):
        cells = groups[alg]
        xs = np.array(sorted(cells), dtype=np.int64)
        means = np.empty(len(xs))
        ses = np.empty(len(xs))
        counts = np.empty(len(xs), dtype=np.int64)
        for pos, x in enumerate(xs):
            vals = np.asarray(cells[int(x)])
            means[pos] = vals.mean()
            ses[pos] = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
            counts[pos] = len(vals)
        curves[alg] = Curve(xs, means, ses, counts)
    return curves
