"""Sampling estimators for Shapley values and top-k player identification.

Fixed-budget estimators (in increasing comparability of the per-round
observations, then with evaluation reuse):

* ``run_independent``   - per player, an independent marginal-law coalition
                          and two fresh evaluations per sample;
* ``run_same_length``   - one shared coalition size per round, subsets still
                          drawn independently per player;
* ``run_identical``     - one shared coalition per round, two fresh
                          evaluations per player (no reuse);
* ``run_cmcs``          - comparable marginal contributions sampling: the
                          shared coalition's worth is evaluated once and
                          reused, n+1 accesses per round;
* ``run_appro_shapley`` - permutation sampling with prefix-worth reuse.

Adaptive estimators: ``run_greedy_cmcs`` (probabilistic pair selection),
``run_cmcs_at_k`` and ``run_sampling_shap_at_k`` (confidence-interval
stopping, usable in fixed-budget or PAC mode).

Budget semantics: every worth access counts one unit against the budget,
whether or not the oracle answers it from the empty/grand cache.  Reported
``budget_used`` is this structural count; ``charged_calls`` is the oracle's
count of real evaluations (always <= budget_used).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _pykernels, backend
from .coalition import Coalition
from .errors import DomainError, InvalidK
from .games import BudgetedOracle, Game
from .rng import (
    RandomSource,
    draw_cmcs_mask,
    draw_marginal_mask,
    normal_cdf,
    normal_quantile,
)

DEFAULT_BUDGET_CAP = 10_000_000  # safety cap for PAC mode on near-tied games
DEFAULT_SELECTION_DELTA = 0.001  # CI level used for pair selection in fixed-budget mode

_ALG_IDS = {
    "independent": _pykernels.ALG_INDEPENDENT,
    "same_length": _pykernels.ALG_SAME_LENGTH,
    "identical": _pykernels.ALG_IDENTICAL,
    "cmcs": _pykernels.ALG_CMCS,
    "appro_shapley": _pykernels.ALG_PERMUTATION,
}


class Checkpoint(NamedTuple):
    budget: int  # requested snapshot mark
    used: int  # structural budget actually consumed when recorded
    phi: np.ndarray


@dataclass(frozen=True)
class RunResult:
    """Outcome of one seeded estimator run."""

    phi_hat: np.ndarray
    top_k: Coalition
    budget_used: int
    charged_calls: int
    checkpoints: tuple[Checkpoint, ...]
    terminated_by: str  # "budget" | "stopping_rule"


@dataclass(frozen=True)
class FixedBudget:
    """Run to a fixed budget; ``delta`` only steers pair selection of the
    @k variants (their stopping rule is ignored in this mode)."""

    budget: int
    delta: float = DEFAULT_SELECTION_DELTA


@dataclass(frozen=True)
class PacMode:
    """Terminate on the confidence-interval stopping rule (or the cap)."""

    eps: float
    delta: float
    budget_cap: int = DEFAULT_BUDGET_CAP


class PairStats(NamedTuple):
    """Joint-round statistics for an ordered player pair (i, j).

    ``sum_diff`` accumulates (d_i - d_j) over the ``count`` rounds in which
    both players were updated, ``sumsq_diff`` the squared differences.
    """

    count: int
    sum_diff: float
    sumsq_diff: float


class EstimatorState:
    """Running per-player and per-pair sufficient statistics.

    Per player: sample count, sum and sum of squares of observed marginal
    contributions.  Per unordered pair: joint-round count, sum and sum of
    squares of the in-round observation differences (stored once for i < j;
    the (j, i) view just flips the sign of the sum).
    """

    def __init__(self, n: int):
        self.n = n
        self.counts = np.zeros(n, dtype=np.int64)
        self.sums = np.zeros(n)
        self.sumsqs = np.zeros(n)
        self.pair_counts = np.zeros((n, n), dtype=np.int64)
        self.pair_diff = np.zeros((n, n))
        self.pair_diff_sq = np.zeros((n, n))

    def observe(self, idx: int, d: float) -> None:
        self.counts[idx] += 1
        self.sums[idx] += d
        self.sumsqs[idx] += d * d

    def observe_pair(self, i_idx: int, j_idx: int, di: float, dj: float) -> None:
        if i_idx > j_idx:
            i_idx, j_idx, di, dj = j_idx, i_idx, dj, di
        diff = di - dj
        self.pair_counts[i_idx, j_idx] += 1
        self.pair_diff[i_idx, j_idx] += diff
        self.pair_diff_sq[i_idx, j_idx] += diff * diff

    def pair(self, i_player: int, j_player: int) -> PairStats:
        """Ordered-pair view for 1-based players (i, j)."""
        a, b = i_player - 1, j_player - 1
        sign = 1.0
        if a > b:
            a, b, sign = b, a, -1.0
        return PairStats(
            int(self.pair_counts[a, b]),
            sign * float(self.pair_diff[a, b]),
            float(self.pair_diff_sq[a, b]),
        )

    def min_pair_count(self) -> int:
        if self.n < 2:
            return 0
        iu = np.triu_indices(self.n, k=1)
        return int(self.pair_counts[iu].min())

    def phi_hat(self) -> np.ndarray:
        counts = self.counts
        return np.where(counts > 0, self.sums / np.where(counts > 0, counts, 1), 0.0)


def top_k_of(phi_hat: Sequence[float], k: int) -> Coalition:
    """The k players with the largest estimates; ties go to lower indices."""
    phi_hat = np.asarray(phi_hat, dtype=np.float64)
    n = len(phi_hat)
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    order = sorted(range(n), key=lambda i: (-phi_hat[i], i))
    return Coalition.from_players([i + 1 for i in order[:k]], n)


# ---------------------------------------------------------------------------
# fixed-budget estimators (kernel-dispatched)


def _check_marks(checkpoints, budget) -> list[int]:
    marks = [int(c) for c in checkpoints]
    if any(m < 0 for m in marks):
        raise DomainError("checkpoint budgets must be >= 0")
    if any(b <= a for a, b in zip(marks, marks[1:])):
        raise DomainError("checkpoint budgets must be strictly increasing")
    return marks


def _run_fixed(alg: str, game: Game, budget: int, k: int, rng: RandomSource, checkpoints):
    n = game.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if budget < 0:
        raise DomainError("budget must be >= 0")
    marks = _check_marks(checkpoints, budget)

    kern = backend.active_kernels()
    if kern is not None and game.table is not None:
        sums, counts, t, charged, snaps, snap_used, out_state = kern.run_fixed_budget(
            _ALG_IDS[alg],
            game.table,
            n,
            budget,
            rng.getstate(),
            np.asarray(marks, dtype=np.int64),
        )
        rng.setstate(out_state)
    else:
        oracle = BudgetedOracle(game, budget)
        sums_l, counts_l, t, snaps_l, used_l = _pykernels.run_fixed_budget(
            _ALG_IDS[alg], n, budget, oracle.evaluate, rng, marks
        )
        charged = oracle.calls_used
        sums = np.asarray(sums_l)
        counts = np.asarray(counts_l, dtype=np.int64)
        snaps = np.asarray(snaps_l, dtype=np.float64).reshape(len(marks), n)
        snap_used = np.asarray(used_l, dtype=np.int64)

    phi = np.where(counts > 0, sums / np.where(counts > 0, counts, 1), 0.0)
    cps = tuple(
        Checkpoint(marks[r], int(snap_used[r]), snaps[r].copy()) for r in range(len(marks))
    )
    return RunResult(phi, top_k_of(phi, k), int(t), int(charged), cps, "budget")


def run_independent(game, budget, k, rng, checkpoints=()):
    """Round-robin isolated marginal contributions, 2 accesses per sample."""
    return _run_fixed("independent", game, budget, k, rng, checkpoints)


def run_same_length(game, budget, k, rng, checkpoints=()):
    """Like ``run_independent`` but one shared coalition size per round."""
    return _run_fixed("same_length", game, budget, k, rng, checkpoints)


def run_identical(game, budget, k, rng, checkpoints=()):
    """One shared coalition per round, 2 fresh accesses per player (2n/round)."""
    return _run_fixed("identical", game, budget, k, rng, checkpoints)


def run_cmcs(game, budget, k, rng, checkpoints=()):
    """Comparable-marginal-contributions sampling, n+1 accesses per round.

    Performs exactly ``budget // (n+1)`` complete rounds; the remainder of
    the budget is left unused.
    """
    return _run_fixed("cmcs", game, budget, k, rng, checkpoints)


def run_appro_shapley(game, budget, k, rng, checkpoints=()):
    """Permutation sampling with prefix reuse, n accesses per permutation.

    A permutation interrupted by the budget still contributes the samples of
    its completed prefix steps.
    """
    return _run_fixed("appro_shapley", game, budget, k, rng, checkpoints)


# ---------------------------------------------------------------------------
# pairwise mis-ranking probability and player selection


def pair_probability(stats: PairStats) -> float:
    """Estimated probability that the pair (i, j) is wrongly partitioned.

    With m joint rounds, mean difference dhat = -sum_diff/m and unbiased
    variance s2 of the per-round differences, returns
    ``Phi(sqrt(m) * dhat / s)``.  Degenerate fallbacks: fewer than two joint
    rounds give 0.5 (maximal uncertainty); zero variance gives the point-mass
    limit 0, 0.5, or 1 according to the sign of dhat.
    """
    m = stats.count
    if m < 2:
        return 0.5
    dhat = -stats.sum_diff / m
    s2 = (stats.sumsq_diff - stats.sum_diff * stats.sum_diff / m) / (m - 1)
    if s2 <= 0.0:
        if dhat > 0.0:
            return 1.0
        if dhat < 0.0:
            return 0.0
        return 0.5
    return normal_cdf(math.sqrt(m) * dhat / math.sqrt(s2))


def select_players(state: EstimatorState, k: int, m_min: int, rng: RandomSource):
    """Choose the players to update this round.

    During warm-up (any pair with fewer than ``m_min`` joint rounds) every
    player is selected.  Afterwards the players are split into the current
    top-k and the rest; each cross pair is included independently with
    probability ``(p - p_min) / (p_max - p_min)`` of its mis-ranking estimate
    p, which forces the most suspect pair in and leaves the least suspect
    out.  If all pairs are equally suspect there is no basis for selectivity
    and every player is selected.

    Returns ``(players, pairs)`` with 1-based ids; ``pairs`` is empty for
    all-select rounds.
    """
    n = state.n
    everyone = set(range(1, n + 1))
    if k >= n or state.min_pair_count() < m_min:
        return everyone, set()
    phi = state.phi_hat()
    top = top_k_of(phi, k)
    inside = list(top.players())
    outside = [p for p in range(1, n + 1) if not top.contains(p)]
    pairs = [(i, j) for i in inside for j in outside]
    probs = {pair: pair_probability(state.pair(*pair)) for pair in pairs}
    p_max = max(probs.values())
    p_min = min(probs.values())
    if p_max == p_min:
        return everyone, set()
    chosen: set[tuple[int, int]] = set()
    members: set[int] = set()
    span = p_max - p_min
    for pair in pairs:  # fixed iteration order keeps runs reproducible
        if rng.uniform() < (probs[pair] - p_min) / span:
            chosen.add(pair)
            members.add(pair[0])
            members.add(pair[1])
    return members, chosen


# ---------------------------------------------------------------------------
# confidence intervals and the stopping rule


class CiBounds(NamedTuple):
    lower: np.ndarray
    upper: np.ndarray
    degenerate: np.ndarray  # True where the sample variance collapsed to 0


def ci_bounds(state: EstimatorState, delta: float) -> CiBounds:
    """Per-player normal confidence intervals at union-bound level delta/n.

    Each interval is ``phi_hat_i +- z * s_i / sqrt(m_i)`` with
    ``z = quantile(1 - delta/(2n))`` and s_i the unbiased sample standard
    deviation; requires at least two samples per player.  ``delta >= 1``
    demands no coverage at all and yields zero-width intervals.
    """
    counts = state.counts
    if int(counts.min()) < 2:
        raise DomainError("confidence intervals need at least 2 samples per player")
    n = state.n
    z = 0.0 if delta >= 1.0 else normal_quantile(1.0 - delta / (2.0 * n))
    var = (state.sumsqs - state.sums * state.sums / counts) / (counts - 1)
    var = np.maximum(var, 0.0)
    half = z * np.sqrt(var / counts)
    phi = state.phi_hat()
    return CiBounds(phi - half, phi + half, var == 0.0)


def stopping_condition(state: EstimatorState, k: int, delta: float, eps: float):
    """Check the cross-pair confidence-interval overlaps.

    Over all i in the current top-k and j outside it, the overlap is
    ``max(0, ucb_j - lcb_i)``; the run may stop once the largest overlap is
    at most eps.  Returns ``(stop, worst_pair)`` with the argmax pair in
    1-based ids (ties resolved toward lower indices), or ``(True, None)``
    when k = n leaves no cross pairs.
    """
    n = state.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if k == n:
        return True, None
    bounds = ci_bounds(state, delta)
    top = top_k_of(state.phi_hat(), k)
    inside = list(top.players())
    outside = [p for p in range(1, n + 1) if not top.contains(p)]
    worst = None
    worst_overlap = -math.inf
    for i in inside:
        for j in outside:
            overlap = bounds.upper[j - 1] - bounds.lower[i - 1]
            if overlap < 0.0:
                overlap = 0.0
            if overlap > worst_overlap:
                worst_overlap = overlap
                worst = (i, j)
    return worst_overlap <= eps, worst


# ---------------------------------------------------------------------------
# adaptive estimators (pure Python)


class _MarkRecorder:
    """Snapshot collector shared by the adaptive estimator loops."""

    def __init__(self, marks: list[int], state: EstimatorState):
        self.marks = marks
        self.state = state
        self.rows: list[np.ndarray] = []
        self.used: list[int] = []
        self.pos = 0
        self.tick(0)

    def tick(self, t: int) -> None:
        while self.pos < len(self.marks) and self.marks[self.pos] == t:
            self.rows.append(self.state.phi_hat())
            self.used.append(t)
            self.pos += 1

    def finish(self, t: int) -> tuple[Checkpoint, ...]:
        while self.pos < len(self.marks):
            self.rows.append(self.state.phi_hat())
            self.used.append(t)
            self.pos += 1
        return tuple(
            Checkpoint(m, u, row) for m, u, row in zip(self.marks, self.used, self.rows)
        )


def run_greedy_cmcs(game, budget, k, m_min, rng, checkpoints=()):
    """Comparable sampling with relaxed greedy player selection.

    Warm-up performs full rounds until every pair has ``m_min`` joint rounds
    (costing ``(n+1) * m_min`` accesses), then each round evaluates only the
    selected players.  After a completed player loop the pair statistics of
    every unordered pair within the selected set are updated; a round cut
    short by the budget keeps its per-player updates but records no pair
    statistics.
    """
    n = game.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if m_min < 2:
        raise DomainError("m_min must be >= 2")
    if budget < 0:
        raise DomainError("budget must be >= 0")
    marks = _check_marks(checkpoints, budget)
    oracle = BudgetedOracle(game, budget)
    state = EstimatorState(n)
    rec = _MarkRecorder(marks, state)
    t = 0
    while t < budget:
        s_mask = draw_cmcs_mask(n, rng)
        v = oracle.evaluate(s_mask)
        t += 1
        rec.tick(t)
        players, _pairs = select_players(state, k, m_min, rng)
        selected = sorted(p - 1 for p in players)
        deltas = {}
        truncated = False
        for idx in selected:
            if t >= budget:
                truncated = True
                break
            b = 1 << idx
            if s_mask & b:
                d = v - oracle.evaluate(s_mask & ~b)
            else:
                d = oracle.evaluate(s_mask | b) - v
            t += 1
            state.observe(idx, d)
            deltas[idx] = d
            rec.tick(t)
        if truncated:
            break
        for a in range(len(selected)):
            for c in range(a + 1, len(selected)):
                i_idx, j_idx = selected[a], selected[c]
                state.observe_pair(i_idx, j_idx, deltas[i_idx], deltas[j_idx])
    phi = state.phi_hat()
    return RunResult(phi, top_k_of(phi, k), t, oracle.calls_used, rec.finish(t), "budget")


def _warmup_shared_rounds(game, oracle, state, rec, rounds, t, rng):
    """Full shared-coalition rounds; updates all players and all pair stats."""
    n = game.n
    for _ in range(rounds):
        s_mask = draw_cmcs_mask(n, rng)
        v = oracle.evaluate(s_mask)
        t += 1
        rec.tick(t)
        deltas = [0.0] * n
        for idx in range(n):
            b = 1 << idx
            if s_mask & b:
                d = v - oracle.evaluate(s_mask & ~b)
            else:
                d = oracle.evaluate(s_mask | b) - v
            t += 1
            state.observe(idx, d)
            deltas[idx] = d
            rec.tick(t)
        for i_idx in range(n):
            for j_idx in range(i_idx + 1, n):
                state.observe_pair(i_idx, j_idx, deltas[i_idx], deltas[j_idx])
    return t


def _resolve_mode(mode):
    if isinstance(mode, FixedBudget):
        if mode.budget < 0:
            raise DomainError("budget must be >= 0")
        return mode.budget, mode.delta, None
    if isinstance(mode, PacMode):
        if mode.delta <= 0.0:
            raise DomainError("PAC mode requires delta > 0")
        return mode.budget_cap, mode.delta, mode.eps
    raise TypeError("mode must be FixedBudget or PacMode")


def run_cmcs_at_k(game, mode, k, m_min, rng, checkpoints=()):
    """Shared-coalition sampling with confidence-interval pair refinement.

    Phase 1 runs ``m_min`` full shared-coalition rounds (fewer if the budget
    is smaller, in which case this is plain truncated comparable sampling).
    Phase 2 repeatedly takes the cross pair with the largest confidence
    interval overlap and refreshes both players from one new shared coalition
    (3 accesses per round).  ``FixedBudget`` runs to the budget ignoring the
    stopping rule; ``PacMode`` stops once no overlap exceeds eps, or at the
    safety cap.
    """
    n = game.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if m_min < 2:
        raise DomainError("m_min must be >= 2")
    cap, delta, eps = _resolve_mode(mode)
    marks = _check_marks(checkpoints, cap)
    oracle = BudgetedOracle(game, cap)
    state = EstimatorState(n)
    rec = _MarkRecorder(marks, state)
    warm_rounds = min(m_min, cap // (n + 1))
    t = _warmup_shared_rounds(game, oracle, state, rec, warm_rounds, 0, rng)
    terminated_by = "budget"
    if warm_rounds == m_min:
        while t < cap:
            stop, worst = stopping_condition(state, k, delta, eps if eps is not None else 0.0)
            if eps is not None and stop:
                terminated_by = "stopping_rule"
                break
            if worst is None:  # k == n leaves nothing to refine
                terminated_by = "stopping_rule" if eps is not None else terminated_by
                break
            s_mask = draw_cmcs_mask(n, rng)
            v = oracle.evaluate(s_mask)
            t += 1
            rec.tick(t)
            deltas = {}
            truncated = False
            for player in worst:
                if t >= cap:
                    truncated = True
                    break
                idx = player - 1
                b = 1 << idx
                if s_mask & b:
                    d = v - oracle.evaluate(s_mask & ~b)
                else:
                    d = oracle.evaluate(s_mask | b) - v
                t += 1
                state.observe(idx, d)
                deltas[idx] = d
                rec.tick(t)
            if truncated:
                break
            i_idx, j_idx = worst[0] - 1, worst[1] - 1
            state.observe_pair(i_idx, j_idx, deltas[i_idx], deltas[j_idx])
    phi = state.phi_hat()
    return RunResult(
        phi, top_k_of(phi, k), t, oracle.calls_used, rec.finish(t), terminated_by
    )


def run_sampling_shap_at_k(game, mode, k, m_min, rng, checkpoints=()):
    """Isolated-marginal sampling with confidence-interval pair refinement.

    Phase 1 gives every player ``m_min`` independent marginal-law samples
    (2 accesses each).  Phase 2 draws, for each member of the worst
    overlapping cross pair, one further independent marginal sample (4
    accesses per round).  Pair statistics are not tracked; the stopping rule
    only needs the per-player intervals.
    """
    n = game.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if m_min < 2:
        raise DomainError("m_min must be >= 2")
    cap, delta, eps = _resolve_mode(mode)
    marks = _check_marks(checkpoints, cap)
    oracle = BudgetedOracle(game, cap)
    state = EstimatorState(n)
    rec = _MarkRecorder(marks, state)
    t = 0
    complete_warmup = True
    for _ in range(m_min):
        for idx in range(n):
            if t + 2 > cap:
                complete_warmup = False
                break
            s_mask = draw_marginal_mask(idx, n, rng)
            base = oracle.evaluate(s_mask)
            t += 1
            rec.tick(t)
            joined = oracle.evaluate(s_mask | (1 << idx))
            t += 1
            state.observe(idx, joined - base)
            rec.tick(t)
        if not complete_warmup:
            break
    terminated_by = "budget"
    if complete_warmup:
        while t < cap:
            stop, worst = stopping_condition(state, k, delta, eps if eps is not None else 0.0)
            if eps is not None and stop:
                terminated_by = "stopping_rule"
                break
            if worst is None:
                terminated_by = "stopping_rule" if eps is not None else terminated_by
                break
            aborted = False
            for player in worst:
                if t + 2 > cap:
                    aborted = True
                    break
                idx = player - 1
                s_mask = draw_marginal_mask(idx, n, rng)
                base = oracle.evaluate(s_mask)
                t += 1
                rec.tick(t)
                joined = oracle.evaluate(s_mask | (1 << idx))
                t += 1
                state.observe(idx, joined - base)
                rec.tick(t)
            if aborted:
                break
    phi = state.phi_hat()
    return RunResult(
        phi, top_k_of(phi, k), t, oracle.calls_used, rec.finish(t), terminated_by
    )
