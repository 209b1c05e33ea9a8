"""Render metric curves with shaded standard-error bands.

Output is deterministic: a fixed style, a fixed per-algorithm color cycle,
a fixed SVG hash salt, and no date metadata, so rendering the same CSV with
the same spec twice produces byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .curves import CurveSpec, compute_curves, load_rows

# one fixed color per algorithm, stable across figures
ALGORITHM_COLORS = {
    "independent": "#1f77b4",
    "same_length": "#ff7f0e",
    "identical": "#2ca02c",
    "cmcs": "#d62728",
    "appro_shapley": "#9467bd",
    "greedy_cmcs": "#8c564b",
    "cmcs_at_k": "#e377c2",
    "sampling_shap_at_k": "#7f7f7f",
}
_FALLBACK_COLORS = ("#bcbd22", "#17becf", "#aec7e8", "#ffbb78")

_METRIC_LABELS = {
    "eps_inc_exc": "inclusion-exclusion error",
    "ratio_precision": "ratio precision",
    "binary_precision": "binary precision",
    "mse": "mean squared error",
}


def _color_for(alg: str, fallback_idx: int) -> str:
    base = alg.split(":", 1)[0]
    if base in ALGORITHM_COLORS:
        return ALGORITHM_COLORS[base]
    return _FALLBACK_COLORS[fallback_idx % len(_FALLBACK_COLORS)]


def render(csv_path, spec: CurveSpec, out_path, logy: bool = False) -> dict:
    """Plot one line + band per algorithm; returns the plotted curves."""
    rows = load_rows(csv_path)
    curves = compute_curves(rows, spec)

    plt.rcParams["svg.hashsalt"] = "shaptopk-plots"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    fallback_idx = 0
    for alg, curve in curves.items():
        color = _color_for(alg, fallback_idx)
        if alg.split(":", 1)[0] not in ALGORITHM_COLORS:
            fallback_idx += 1
        ax.plot(curve.xs, curve.means, label=alg, color=color, marker="o",
                markersize=3.5, linewidth=1.5)
        ax.fill_between(curve.xs, curve.means - curve.ses, curve.means + curve.ses,
                        color=color, alpha=0.2, linewidth=0)
    fixed = f"k={spec.k}" if spec.x == "T" else f"T={spec.T}"
    ax.set_xlabel("budget T" if spec.x == "T" else "k")
    ax.set_ylabel(_METRIC_LABELS[spec.metric])
    ax.set_title(f"{spec.game} ({fixed})")
    if logy:
        ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=9)
    ax.grid(True, alpha=0.25, linewidth=0.5)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, metadata=_clean_metadata(out_path))
    plt.close(fig)
    return curves


def _clean_metadata(out_path: Path):
    suffix = out_path.suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    return None
