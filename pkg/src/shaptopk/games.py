"""Cooperative games, the budget-metered oracle, and exhaustive exact solvers.

A game is a player count ``n`` plus a worth function over coalition masks,
normalized at construction so the empty coalition is worth exactly 0.0 (the
Shapley value is invariant under that shift).  Small games additionally carry
a dense worth table indexed by mask, which the compiled sampling kernels use
directly.

Estimator code accesses worths only through :class:`BudgetedOracle`.  The
oracle counts every *charged* evaluation; the empty and grand coalition are
precomputed at construction and answered for free afterwards.  Estimators keep
their own structural budget counter on top of this (see ``estimators``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .coalition import Coalition
from .errors import (
    BudgetExhausted,
    FormatError,
    InvalidCarrier,
    InvalidK,
    InvalidSize,
    SizeError,
)

# Largest n for which constructors eagerly materialize a dense table (8 MB),
# and the hard cap for exhaustive enumeration (2^25 coalition loops).
MAX_TABLE_N = 20
MAX_EXHAUSTIVE_N = 25

ELIGIBILITY_TOL = 1e-12


@dataclass
class Game:
    """A cooperative game: player count plus a deterministic worth function.

    ``value`` maps a coalition mask to its worth and must satisfy
    ``value(0) == 0.0``; use the constructors below or :meth:`from_callable`,
    which normalize this.  ``table``, when present, is the dense worth-by-mask
    array (float64, length 2**n) and is what the compiled kernels consume.
    """

    n: int
    value: Callable[[int], float]
    label: str = "game"
    table: np.ndarray | None = None

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[int], float], label: str = "game") -> "Game":
        if n < 1:
            raise InvalidSize(f"need at least one player, got n={n}")
        v0 = float(fn(0))
        return cls(n, lambda mask: float(fn(mask)) - v0, label)

    @property
    def grand_mask(self) -> int:
        return (1 << self.n) - 1

    def materialize(self) -> "Game":
        """Attach a dense worth table (evaluates all 2**n coalitions)."""
        if self.table is None:
            tbl = np.fromiter(
                (self.value(m) for m in range(1 << self.n)), dtype=np.float64, count=1 << self.n
            )
            self.table = tbl
            self.value = _table_lookup(tbl)
        return self


def _table_lookup(tbl: np.ndarray) -> Callable[[int], float]:
    def value(mask: int) -> float:
        return float(tbl[mask])

    return value


def _game_from_table(n: int, tbl: np.ndarray, label: str) -> Game:
    tbl = np.asarray(tbl, dtype=np.float64).copy()
    tbl -= tbl[0]  # empty coalition worth is defined to be zero
    return Game(n, _table_lookup(tbl), label, tbl)


class BudgetedOracle:
    """Budget-metered access to a game's worth function.

    ``calls_used`` counts charged evaluations and never exceeds
    ``budget_limit``.  The empty and grand coalitions are precomputed at
    construction without charge and stay free afterwards; every other
    evaluation charges exactly one call (there is no general memoization,
    duplicate coalitions are charged every time).

    An oracle is mutable single-owner state: one estimator run owns one
    oracle.  Parallel runs each construct their own (game worth functions
    themselves are pure and safe to share).
    """

    __slots__ = ("game", "budget_limit", "calls_used", "_full", "_v_empty", "_v_full")

    def __init__(self, game: Game, budget_limit: int):
        if budget_limit < 0:
            raise ValueError("budget_limit must be >= 0")
        self.game = game
        self.budget_limit = budget_limit
        self.calls_used = 0
        self._full = game.grand_mask
        self._v_empty = game.value(0)
        self._v_full = game.value(self._full)

    def evaluate(self, mask: int) -> float:
        if mask == 0:
            return self._v_empty
        if mask == self._full:
            return self._v_full
        if self.calls_used >= self.budget_limit:
            raise BudgetExhausted(
                f"budget of {self.budget_limit} charged evaluations exhausted"
            )
        self.calls_used += 1
        return self.game.value(mask)

    def evaluate_coalition(self, coalition: Coalition) -> float:
        if coalition.n != self.game.n:
            raise ValueError("coalition is over a different player set")
        return self.evaluate(coalition.mask)


# ---------------------------------------------------------------------------
# game constructors


def make_unanimity_game(n: int) -> Game:
    """Worth 1 for the grand coalition, 0 otherwise; every player gets 1/n."""
    if n < 1:
        raise InvalidSize(f"need at least one player, got n={n}")
    full = (1 << n) - 1
    if n <= MAX_TABLE_N:
        tbl = np.zeros(1 << n)
        tbl[full] = 1.0
        return _game_from_table(n, tbl, f"unanimity:{n}")
    return Game(n, lambda mask: 1.0 if mask == full else 0.0, f"unanimity:{n}")


def make_carrier_game(n: int, carrier: Coalition | Iterable[int]) -> Game:
    """Worth 1 exactly when the carrier is contained in the coalition.

    Players inside the carrier share the worth equally, everyone else is a
    dummy with Shapley value 0.
    """
    if isinstance(carrier, Coalition):
        if carrier.n != n:
            raise InvalidCarrier("carrier is over a different player set")
        cmask = carrier.mask
    else:
        cmask = Coalition.from_players(carrier, n).mask
    if cmask == 0:
        raise InvalidCarrier("carrier must be non-empty")
    label = f"carrier:{n},{'+'.join(map(str, Coalition(cmask, n).players()))}"
    if n <= MAX_TABLE_N:
        masks = np.arange(1 << n, dtype=np.int64)
        tbl = ((masks & cmask) == cmask).astype(np.float64)
        return _game_from_table(n, tbl, label)
    return Game(n, lambda mask: 1.0 if mask & cmask == cmask else 0.0, label)


def make_airport_game(costs: Iterable[float]) -> Game:
    """Worth of a coalition is the largest member cost (0 for the empty set)."""
    cost_arr = np.asarray(list(costs), dtype=np.float64)
    n = len(cost_arr)
    if n < 1:
        raise InvalidSize("need at least one player")
    label = "airport:" + ",".join(_fmt_num(c) for c in cost_arr)

    def value(mask: int) -> float:
        worst = 0.0
        m = mask
        while m:
            b = m & -m
            c = cost_arr[b.bit_length() - 1]
            if c > worst:
                worst = c
            m ^= b
        return worst

    game = Game(n, value, label)
    if n <= MAX_TABLE_N:
        game.materialize()
    return game


def make_random_sou_game(n: int, terms: int, seed: int) -> Game:
    """Random signed sum-of-unanimity game, reproducible from the seed.

    ``terms`` random non-empty carriers U_t with weights w_t drawn uniformly
    from [-1, 1]; the worth of S is the sum of w_t over carriers contained in
    S.  Produces heterogeneous games with negative marginal contributions.
    """
    from .rng import RandomSource  # local import: rng does not depend on games

    if n < 1:
        raise InvalidSize(f"need at least one player, got n={n}")
    if terms < 1:
        raise InvalidSize(f"need at least one term, got terms={terms}")
    if n > 62:
        raise SizeError("sum-of-unanimity constructor supports n <= 62")
    rng = RandomSource(seed)
    carriers = []
    weights = []
    for _ in range(terms):
        carriers.append(1 + rng.randbelow((1 << n) - 1))
        weights.append(2.0 * rng.uniform() - 1.0)
    label = f"sou:{n},{terms},{seed}"

    def value(mask: int) -> float:
        total = 0.0
        for cmask, w in zip(carriers, weights):
            if mask & cmask == cmask:
                total += w
        return total

    game = Game(n, value, label)
    if n <= MAX_TABLE_N:
        game.materialize()
    return game


def _fmt_num(x: float) -> str:
    return format(x, "g")


# ---------------------------------------------------------------------------
# tabular game files


def load_tabular_game(path) -> Game:
    """Load a game from the tabular text format.

    Line 1 holds the player count n, followed by exactly 2**n lines of
    ``<subset-index> <value>`` sorted ascending by subset index (bit i of the
    index encodes player i+1).  ``#`` comment lines and blank lines are
    ignored.  Worths are normalized by subtracting the stored empty-set value.
    """
    path = Path(path)
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            rows.append((lineno, stripped))
    if not rows:
        raise FormatError(f"{path}: empty file")
    lineno, header = rows[0]
    try:
        n = int(header)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: header must be the integer player count") from None
    if n < 1:
        raise FormatError(f"{path}:{lineno}: player count must be >= 1, got {n}")
    if n > MAX_EXHAUSTIVE_N:
        raise SizeError(f"{path}: n={n} exceeds the tabular limit of {MAX_EXHAUSTIVE_N}")
    expected = 1 << n
    body = rows[1:]
    if len(body) != expected:
        raise FormatError(
            f"{path}: expected {expected} value lines for n={n}, found {len(body)}"
        )
    tbl = np.empty(expected)
    for pos, (lineno, line) in enumerate(body):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected '<subset-index> <value>'")
        try:
            idx = int(parts[0])
            val = float(parts[1])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric entry") from None
        if idx != pos:
            raise FormatError(
                f"{path}:{lineno}: subset index {idx} out of order (expected {pos})"
            )
        tbl[pos] = val
    return _game_from_table(n, tbl, f"tabular:{path}")


def save_tabular_game(game: Game, path) -> None:
    """Write a game's full worth table in the tabular text format."""
    if game.n > MAX_EXHAUSTIVE_N:
        raise SizeError(f"n={game.n} exceeds the tabular limit of {MAX_EXHAUSTIVE_N}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{game.n}\n")
        for mask in range(1 << game.n):
            fh.write(f"{mask} {format(game.value(mask), '.17g')}\n")


# ---------------------------------------------------------------------------
# exhaustive exact solvers


def _check_exhaustive(n: int) -> None:
    if n > MAX_EXHAUSTIVE_N:
        raise SizeError(f"exhaustive enumeration supports n <= {MAX_EXHAUSTIVE_N}, got {n}")


def exact_shapley(game: Game) -> np.ndarray:
    """Exact Shapley values by direct enumeration of all coalitions.

    Sums ``(nu(S+i) - nu(S)) / (n * C(n-1, |S|))`` over all S not containing
    i, in ascending mask order with compensated (fsum) accumulation.
    """
    n = game.n
    _check_exhaustive(n)
    w = [1.0 / (n * math.comb(n - 1, s)) for s in range(n)]
    value = game.value
    phi = np.empty(n)
    for idx in range(n):
        b = 1 << idx
        phi[idx] = math.fsum(
            w[mask.bit_count()] * (value(mask | b) - value(mask))
            for mask in range(1 << n)
            if not mask & b
        )
    return phi


def exact_shapley_extended(game: Game) -> np.ndarray:
    """Exact Shapley values through the symmetric-difference representation.

    Sums ``(nu(S+i) - nu(S-i)) / ((n+1) * C(n, |S|))`` over *all* coalitions
    S; agrees with :func:`exact_shapley` and exercises the weighting the
    shared-coalition samplers rely on.
    """
    n = game.n
    _check_exhaustive(n)
    w = [1.0 / ((n + 1) * math.comb(n, s)) for s in range(n + 1)]
    value = game.value
    phi = np.empty(n)
    for idx in range(n):
        b = 1 << idx
        phi[idx] = math.fsum(
            w[mask.bit_count()] * (value(mask | b) - value(mask & ~b))
            for mask in range(1 << n)
        )
    return phi


def eligible_sets(phi: np.ndarray, k: int) -> set[Coalition]:
    """All size-k coalitions whose member values sum to the maximum.

    Sums within ``ELIGIBILITY_TOL`` of the best are treated as ties, since
    exact solvers emit rationals only up to floating-point rounding.
    """
    import itertools

    phi = np.asarray(phi, dtype=np.float64)
    n = len(phi)
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    best = -math.inf
    sums = []
    for combo in itertools.combinations(range(n), k):
        s = math.fsum(phi[i] for i in combo)
        sums.append((combo, s))
        if s > best:
            best = s
    return {
        Coalition.from_players([i + 1 for i in combo], n)
        for combo, s in sums
        if s >= best - ELIGIBILITY_TOL
    }
