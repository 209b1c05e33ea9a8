"""Quality measures for top-k estimates and exhaustive theoretical oracles.

The moment oracle enumerates the full power set under the two sampling laws
the estimators use and yields exact per-player variances, pairwise
covariances, and pairwise difference variances.  On top of those sit the
closed-form predictions: the expected mean squared error of the samplers and
a lower bound on the probability of returning a near-eligible top-k set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .coalition import Coalition
from .errors import InvalidK, LengthMismatch, NotMultiple, SamePlayer, SizeError
from .games import Game, exact_shapley
from .rng import normal_cdf

MAX_MOMENTS_N = 20


def mse(phi: Sequence[float], phi_hat: Sequence[float]) -> float:
    """Mean squared error between two player-value vectors."""
    phi = np.asarray(phi, dtype=np.float64)
    phi_hat = np.asarray(phi_hat, dtype=np.float64)
    if phi.shape != phi_hat.shape:
        raise LengthMismatch(f"lengths differ: {phi.shape} vs {phi_hat.shape}")
    diff = phi - phi_hat
    return math.fsum(float(d) * float(d) for d in diff) / len(phi)


def _check_estimate(k_hat: Coalition, eligible: Iterable[Coalition]) -> list[Coalition]:
    elig = list(eligible)
    if not elig:
        raise InvalidK("the eligible set collection is empty")
    k = elig[0].size()
    if any(e.size() != k or e.n != k_hat.n for e in elig):
        raise InvalidK("inconsistent eligible sets")
    if k_hat.size() != k:
        raise InvalidK(f"estimate has {k_hat.size()} players, expected {k}")
    return elig


def binary_precision(k_hat: Coalition, eligible: Iterable[Coalition]) -> int:
    """1 when the estimate is exactly one of the eligible coalitions."""
    elig = _check_estimate(k_hat, eligible)
    return int(any(e.mask == k_hat.mask for e in elig))


def ratio_precision(k_hat: Coalition, eligible: Iterable[Coalition]) -> float:
    """Largest fraction of the estimate shared with any eligible coalition."""
    elig = _check_estimate(k_hat, eligible)
    k = k_hat.size()
    return max((e.mask & k_hat.mask).bit_count() for e in elig) / k


def inclusion_exclusion_error(k_hat: Coalition, phi: Sequence[float], k: int) -> float:
    """Smallest eps making every included player eps-close below the k-th
    largest exact value and every excluded player eps-close above it."""
    phi = np.asarray(phi, dtype=np.float64)
    n = len(phi)
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    if k_hat.n != n or k_hat.size() != k:
        raise InvalidK(f"estimate must have exactly {k} of {n} players")
    phi_kstar = np.sort(phi)[n - k]
    worst = 0.0
    for idx in range(n):
        if k_hat.mask >> idx & 1:
            gap = phi_kstar - phi[idx]  # wrongly included if positive
        else:
            gap = phi[idx] - phi_kstar  # wrongly excluded if positive
        if gap > worst:
            worst = gap
    return worst


# ---------------------------------------------------------------------------
# exhaustive moment oracle


@dataclass(frozen=True)
class GameMoments:
    """Exact moments of the per-round observations, by full enumeration.

    Shared-coalition law (one coalition per round, symmetric-difference
    contributions): ``phi`` holds the expectations (the exact Shapley
    values), ``var`` the per-player variances, ``cov`` the pairwise
    covariances, and ``diff_var`` the variances of pairwise observation
    differences, each enumerated independently.  ``var_isolated`` holds the
    per-player variances under the isolated marginal law used by the
    independent-sampling estimators (numerically identical to ``var``).
    """

    n: int
    phi: np.ndarray
    var: np.ndarray
    cov: np.ndarray
    diff_var: np.ndarray
    var_isolated: np.ndarray


def _mask_sizes(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        sizes += (masks >> b) & 1
    return sizes


def _wsum(weights: np.ndarray, values: np.ndarray, compensated: bool) -> float:
    if compensated:
        return math.fsum((weights * values).tolist())
    return float(np.dot(weights, values))


def exact_moments(game: Game) -> GameMoments:
    """Enumerate the exact observation moments of a game (n <= 20).

    Uses compensated summation up to n = 12 and pairwise numpy reduction
    beyond, where the term count makes fsum impractical.
    """
    n = game.n
    if n > MAX_MOMENTS_N:
        raise SizeError(f"moment enumeration supports n <= {MAX_MOMENTS_N}, got {n}")
    tbl = game.table
    if tbl is None:
        tbl = np.fromiter(
            (game.value(m) for m in range(1 << n)), dtype=np.float64, count=1 << n
        )
    compensated = n <= 12
    sizes = _mask_sizes(n)
    masks = np.arange(1 << n, dtype=np.int64)
    size_w = np.array([1.0 / ((n + 1) * math.comb(n, s)) for s in range(n + 1)])
    w = size_w[sizes]

    deltas = np.empty((n, 1 << n))
    for idx in range(n):
        b = 1 << idx
        deltas[idx] = tbl[masks | b] - tbl[masks & ~b]

    phi = np.array([_wsum(w, deltas[i], compensated) for i in range(n)])
    second = np.array([_wsum(w, deltas[i] * deltas[i], compensated) for i in range(n)])
    var = second - phi * phi

    cov = np.zeros((n, n))
    diff_var = np.zeros((n, n))
    for i in range(n):
        cov[i, i] = var[i]
        for j in range(i + 1, n):
            cross = _wsum(w, deltas[i] * deltas[j], compensated)
            cov[i, j] = cov[j, i] = cross - phi[i] * phi[j]
            d = deltas[i] - deltas[j]
            second_diff = _wsum(w, d * d, compensated)
            mean_diff = phi[i] - phi[j]
            diff_var[i, j] = diff_var[j, i] = second_diff - mean_diff * mean_diff

    # isolated marginal law: S ranges over subsets excluding i
    size_w10 = np.array([1.0 / (n * math.comb(n - 1, s)) for s in range(n)])
    var_isolated = np.empty(n)
    for idx in range(n):
        b = 1 << idx
        keep = (masks & b) == 0
        w10 = size_w10[sizes[keep]]
        d10 = tbl[masks[keep] | b] - tbl[masks[keep]]
        mean = _wsum(w10, d10, compensated)
        var_isolated[idx] = _wsum(w10, d10 * d10, compensated) - mean * mean

    return GameMoments(n, phi, var, cov, diff_var, var_isolated)


def covariance_formula(game: Game, i: int, j: int) -> float:
    """Closed-form covariance of the shared-round observations of players
    i and j (1-based), summed over coalitions excluding i.

    Independent of :func:`exact_moments`, which enumerates the covariance
    directly; the two must agree.
    """
    n = game.n
    if n > MAX_MOMENTS_N:
        raise SizeError(f"covariance formula supports n <= {MAX_MOMENTS_N}, got {n}")
    if i == j:
        raise SamePlayer(f"covariance requires two distinct players, got {i}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidK(f"players must be in 1..{n}")
    phi = exact_shapley(game)
    bi = 1 << (i - 1)
    bj = 1 << (j - 1)
    value = game.value

    def terms():
        for mask in range(1 << n):
            if mask & bi:
                continue
            s = mask.bit_count()
            delta_i = value(mask | bi) - value(mask)
            dj_here = value(mask | bj) - value(mask & ~bj)
            with_i = mask | bi
            dj_there = value(with_i | bj) - value(with_i & ~bj)
            yield delta_i * (dj_here / math.comb(n, s) + dj_there / math.comb(n, s + 1))

    return math.fsum(terms()) / (n + 1) - phi[i - 1] * phi[j - 1]


# ---------------------------------------------------------------------------
# closed-form predictions


class BoundResult(NamedTuple):
    raw: float
    clamped: float


def identification_lower_bound(
    moments: GameMoments, m_rounds: int, eps: float, k: int
) -> BoundResult:
    """Lower bound on the probability that m-round equifrequent sampling
    returns a coalition with inclusion-exclusion error at most eps.

    Sums, over every size-k coalition K within eps of eligibility,
    ``1 - sum over cross pairs of Phi(sqrt(m) (phi_j - phi_i) / sigma_ij)``.
    A zero sigma contributes its point-mass limit (0.5 on exact ties, else 0
    or 1 by sign).  The raw union-style sum can leave [0, 1] for small m, so
    the clamped value is reported alongside it.
    """
    if m_rounds < 1:
        raise ValueError("m_rounds must be >= 1")
    n = moments.n
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    phi = moments.phi
    sqrt_m = math.sqrt(m_rounds)
    total = 0.0
    for combo in itertools.combinations(range(n), k):
        k_hat = Coalition.from_players([c + 1 for c in combo], n)
        if inclusion_exclusion_error(k_hat, phi, k) > eps + 1e-12:
            continue
        inside = set(combo)
        miss = 0.0
        for i in inside:
            for j in range(n):
                if j in inside:
                    continue
                sigma = math.sqrt(max(moments.diff_var[i, j], 0.0))
                gap = phi[j] - phi[i]
                if sigma > 0.0:
                    miss += normal_cdf(sqrt_m * gap / sigma)
                elif gap > 0.0:
                    miss += 1.0
                elif gap == 0.0:
                    miss += 0.5
        total += 1.0 - miss
    return BoundResult(total, min(1.0, max(0.0, total)))


def predicted_mse_rounds(moments: GameMoments, m_rounds: int) -> float:
    """Expected MSE of an unbiased equifrequent sampler after m rounds."""
    if m_rounds < 1:
        raise ValueError("m_rounds must be >= 1")
    n = moments.n
    return math.fsum(moments.var_isolated.tolist()) / (n * m_rounds)


def predicted_mse_budget(moments: GameMoments, budget: int) -> float:
    """Expected MSE of the shared-coalition sampler at a budget that is a
    positive multiple of n+1 (one full round per n+1 accesses)."""
    n = moments.n
    if budget <= 0 or budget % (n + 1):
        raise NotMultiple(f"budget must be a positive multiple of {n + 1}, got {budget}")
    return (n + 1) * math.fsum(moments.var.tolist()) / (n * budget)
