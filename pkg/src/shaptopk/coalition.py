"""Coalitions as bitmasks over a fixed player set.

Players carry 1-based identifiers ``1..n`` throughout the public API; bit
``p - 1`` of a mask is set exactly when player ``p`` is a member.  Mask
integers are what the samplers and solvers work with internally, the
``Coalition`` wrapper is the hashable value handed to callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Coalition:
    """An immutable subset of the player set {1, ..., n}."""

    mask: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("player count must be non-negative")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask {self.mask:#x} has bits outside 1..{self.n}")

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @classmethod
    def grand(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @classmethod
    def from_players(cls, players: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for p in players:
            if not 1 <= p <= n:
                raise ValueError(f"player {p} outside 1..{n}")
            mask |= 1 << (p - 1)
        return cls(mask, n)

    def players(self) -> tuple[int, ...]:
        """Member players in ascending order, 1-based."""
        return tuple(p + 1 for p in range(self.n) if self.mask >> p & 1)

    def size(self) -> int:
        return self.mask.bit_count()

    def contains(self, player: int) -> bool:
        return bool(self.mask >> (player - 1) & 1)

    def __repr__(self):
        return f"Coalition({{{','.join(map(str, self.players()))}}}, n={self.n})"
