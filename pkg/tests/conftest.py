"""Shared test helpers: independent brute-force oracles and game builders.

The oracles here deliberately avoid the library's solver code paths: Shapley
values come from averaging over all n! orderings, and distribution moments
from dictionary-style enumeration, so library results are checked against a
second, independent derivation.
"""

import itertools
import math

import numpy as np
import pytest

from shaptopk import Game, RandomSource
from shaptopk.games import _game_from_table


def shapley_by_permutations(game: Game) -> np.ndarray:
    """Average marginal contribution over every ordering (n <= 7)."""
    n = game.n
    totals = [[] for _ in range(n)]
    for perm in itertools.permutations(range(n)):
        prefix = 0
        prev = game.value(0)
        for idx in perm:
            prefix |= 1 << idx
            cur = game.value(prefix)
            totals[idx].append(cur - prev)
            prev = cur
    fact = math.factorial(n)
    return np.array([math.fsum(t) / fact for t in totals])


def random_table_game(n: int, seed: int, scale: float = 1.0) -> Game:
    """Game with i.i.d. uniform worths on every coalition."""
    rng = RandomSource(seed)
    tbl = np.array([scale * (2.0 * rng.uniform() - 1.0) for _ in range(1 << n)])
    return _game_from_table(n, tbl, f"random:{n},{seed}")


def permute_players(game: Game, perm: list[int]) -> Game:
    """Relabel players: new player perm[i]+1 plays like old player i+1."""
    n = game.n
    tbl = np.empty(1 << n)
    for mask in range(1 << n):
        new_mask = 0
        for b in range(n):
            if mask >> b & 1:
                new_mask |= 1 << perm[b]
        tbl[new_mask] = game.value(mask)
    return _game_from_table(n, tbl, game.label + ":permuted")


@pytest.fixture
def rng():
    return RandomSource(0xC0FFEE)
