"""Acceptance: plotted means equal CSV-recomputed means within 1e-12, and the
variant-ladder figure renders byte-stably from a real harness CSV.

The CSV is produced through the primary package's CLI (the only interface
this package consumes).
"""

import csv
import io
import math
import shutil
import subprocess

import numpy as np
import pytest

from shaptopkplot import CurveSpec, compute_curves, load_rows, render

LADDER_CFG = """
games = unanimity:8
algorithms = independent same_length identical cmcs greedy_cmcs:m_min=10
budgets = 90 300 900
k = 3
runs = 30
base_seed = 606
"""


def _report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def ladder_csv(tmp_path_factory):
    if shutil.which("shaptopk") is None:
        pytest.skip("primary CLI not installed")
    tmp = tmp_path_factory.mktemp("ladder")
    cfg = tmp / "ladder.cfg"
    cfg.write_text(LADDER_CFG)
    out = tmp / "ladder.csv"
    subprocess.run(
        ["shaptopk", "bench", "--config", str(cfg), "--out", str(out),
         "--parallelism", "2"],
        check=True,
        capture_output=True,
    )
    return out


def test_12_plot_fidelity_and_stability(ladder_csv, tmp_path):
    spec = CurveSpec("T", "eps_inc_exc", "unanimity:8", k=3)
    out1 = tmp_path / "fig1.svg"
    out2 = tmp_path / "fig2.svg"
    curves = render(ladder_csv, spec, out1)
    render(ladder_csv, spec, out2)

    # five algorithms, one curve each, stable bytes
    stable = out1.read_bytes() == out2.read_bytes()

    # recompute group means straight from the file, independently of the
    # package's aggregation helpers
    with open(ladder_csv, newline="") as fh:
        raw = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(raw))))
    worst = 0.0
    for alg, curve in curves.items():
        for pos, t_val in enumerate(curve.xs):
            vals = [
                float(r["eps_inc_exc"])
                for r in rows
                if r["algorithm"] == alg and int(r["T"]) == t_val and int(r["k"]) == 3
            ]
            worst = max(worst, abs(curve.means[pos] - math.fsum(vals) / len(vals)))
            se = np.std(vals, ddof=1) / math.sqrt(len(vals))
            worst = max(worst, abs(curve.ses[pos] - se))
    _report(
        "plot fidelity on the variant-ladder CSV",
        len(curves) == 5 and stable and worst < 1e-12,
        f"{len(curves)} curves, byte-stable={stable}, max aggregation dev {worst:.2e}",
    )
