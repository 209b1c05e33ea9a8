"""Pure-Python loops for the five fixed-budget estimators.

This is the fallback backend and the behavioral reference for the compiled
kernels in ``_kernels.pyx``: both consume the random source draw-for-draw in
the same order and apply floating-point updates in the same order, so a run
is bit-identical on either backend.

Budget accounting is structural: every worth-function access advances ``t``
by one, including accesses the oracle answers from its empty/grand cache (the
cache saves computation, never budget).  Snapshots of the running estimate
are recorded exactly when ``t`` reaches a requested mark; marks beyond the
final ``t`` record the final state.
"""

from __future__ import annotations

from .rng import (
    draw_cmcs_mask,
    draw_marginal_mask,
    draw_perm_indices,
    draw_same_length_mask,
)

ALG_INDEPENDENT = 0
ALG_SAME_LENGTH = 1
ALG_IDENTICAL = 2
ALG_CMCS = 3
ALG_PERMUTATION = 4


def run_fixed_budget(alg, n, budget, evaluate, rng, marks):
    """Run one sampling loop; returns (sums, counts, t, snaps, snap_budgets).

    ``marks`` must be strictly increasing non-negative ints.  ``evaluate`` is
    charged structurally here regardless of oracle-side caching.
    """
    sums = [0.0] * n
    counts = [0] * n
    nmarks = len(marks)
    snaps = [[0.0] * n for _ in range(nmarks)]
    snap_budgets = [0] * nmarks
    state = {"pos": 0, "t": 0}

    def snap():
        pos = state["pos"]
        t = state["t"]
        while pos < nmarks and marks[pos] == t:
            row = snaps[pos]
            for i in range(n):
                row[i] = sums[i] / counts[i] if counts[i] else 0.0
            snap_budgets[pos] = t
            pos += 1
        state["pos"] = pos

    def tick():
        state["t"] += 1
        return state["t"]

    snap()  # a mark of 0 records the zero estimate

    if alg == ALG_CMCS:
        # complete rounds only; one shared coalition, n+1 accesses per round
        for _ in range(budget // (n + 1)):
            s_mask = draw_cmcs_mask(n, rng)
            v = evaluate(s_mask)
            tick()
            snap()
            for i in range(n):
                b = 1 << i
                if s_mask & b:
                    d = v - evaluate(s_mask & ~b)
                else:
                    d = evaluate(s_mask | b) - v
                tick()
                sums[i] += d
                counts[i] += 1
                snap()

    elif alg == ALG_IDENTICAL:
        # same estimand as ALG_CMCS but two fresh accesses per player
        while state["t"] + 2 <= budget:
            s_mask = draw_cmcs_mask(n, rng)
            for i in range(n):
                if state["t"] + 2 > budget:
                    break
                b = 1 << i
                hi = evaluate(s_mask | b)
                tick()
                snap()
                lo = evaluate(s_mask & ~b)
                tick()
                sums[i] += hi - lo
                counts[i] += 1
                snap()

    elif alg == ALG_INDEPENDENT:
        while state["t"] + 2 <= budget:
            for i in range(n):
                if state["t"] + 2 > budget:
                    break
                s_mask = draw_marginal_mask(i, n, rng)
                base = evaluate(s_mask)
                tick()
                snap()
                joined = evaluate(s_mask | (1 << i))
                tick()
                sums[i] += joined - base
                counts[i] += 1
                snap()

    elif alg == ALG_SAME_LENGTH:
        while state["t"] + 2 <= budget:
            ell = rng.randbelow(n)
            for i in range(n):
                if state["t"] + 2 > budget:
                    break
                s_mask = draw_same_length_mask(i, n, ell, rng)
                base = evaluate(s_mask)
                tick()
                snap()
                joined = evaluate(s_mask | (1 << i))
                tick()
                sums[i] += joined - base
                counts[i] += 1
                snap()

    elif alg == ALG_PERMUTATION:
        # prefix walk reusing the previous prefix worth; empty prefix is 0
        while state["t"] + 1 <= budget:
            order = draw_perm_indices(n, rng)
            prefix = 0
            prev = 0.0
            for i in order:
                if state["t"] + 1 > budget:
                    break
                prefix |= 1 << i
                cur = evaluate(prefix)
                tick()
                sums[i] += cur - prev
                counts[i] += 1
                prev = cur
                snap()

    else:
        raise ValueError(f"unknown algorithm id {alg}")

    # unreached marks record the final state
    pos = state["pos"]
    t = state["t"]
    while pos < nmarks:
        row = snaps[pos]
        for i in range(n):
            row[i] = sums[i] / counts[i] if counts[i] else 0.0
        snap_budgets[pos] = t
        pos += 1

    return sums, counts, t, snaps, snap_budgets
