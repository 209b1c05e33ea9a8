"""Seeded random sources and the coalition distributions used by the samplers.

The generator is xoshiro256++ (xorshift family) seeded through a SplitMix64
sequence, implemented in plain 64-bit integer arithmetic so that draw
sequences are reproducible across platforms and Python builds.  The compiled
kernels embed the identical algorithm: given equal seeds both backends consume
the generator in lockstep and produce bit-identical runs.

Draw protocol (mirrored exactly by ``_kernels.pyx``):

* ``randbelow(b)``: masked rejection on the low ``ceil(log2(b))`` bits of the
  next 64-bit output; ``b <= 1`` consumes nothing and returns 0.
* subset of size ``l`` from a buffer of ``m`` candidates: partial
  Fisher-Yates, ``j = t + randbelow(m - t)`` and swap, for ``t = 0..l-1``.
* permutation: the same sweep with ``l = m = n``.
* uniform(): the top 53 bits of one output, scaled to [0, 1).

Three coalition laws are provided.  With ``s = |S|``:

* shared-coalition law over all subsets, ``P(S) = 1 / ((n+1) * C(n, s))``,
  realized as a uniform size on {0..n} followed by a uniform subset of that
  size (used by the comparable-marginal-contribution samplers);
* per-player marginal law over subsets excluding player i,
  ``P(S) = 1 / (n * C(n-1, s))``, realized the same way over {0..n-1};
* uniform permutations of the player set.
"""

from __future__ import annotations

import math

from .coalition import Coalition
from .errors import DomainError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U53_INV = 1.0 / (1 << 53)


def _mix64(z: int) -> int:
    """SplitMix64 output function; bijective on 64-bit words."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Seed of an independent child stream, a pure function of (seed, stream).

    Injective in ``stream`` for a fixed base seed, so distinct stream ids
    (run indices, worker ids, ...) never collide.
    """
    return _mix64((_mix64(seed) + (stream + 1) * _GOLDEN) & _MASK64)


class RandomSource:
    """xoshiro256++ stream with explicit, portable state.

    One source is owned by exactly one estimator run; concurrent runs derive
    independent children via :func:`derive_seed`.
    """

    __slots__ = ("seed", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        seed &= _MASK64
        self.seed = seed
        sm = seed
        state = []
        for _ in range(4):
            sm = (sm + _GOLDEN) & _MASK64
            state.append(_mix64(sm))
        if not any(state):  # all-zero state is invalid for xoshiro
            state[0] = _GOLDEN
        self._s0, self._s1, self._s2, self._s3 = state

    def getstate(self) -> tuple[int, int, int, int]:
        return (self._s0, self._s1, self._s2, self._s3)

    def setstate(self, state) -> None:
        s0, s1, s2, s3 = (int(x) & _MASK64 for x in state)
        if not (s0 | s1 | s2 | s3):
            raise ValueError("all-zero xoshiro state")
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s0 + s3) & _MASK64
        result = (((x << 23) | (x >> 41)) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _U53_INV

    def randbelow(self, bound: int) -> int:
        """Unbiased integer in [0, bound); bound <= 1 consumes no output."""
        if bound <= 1:
            if bound < 1:
                raise ValueError("bound must be >= 1")
            return 0
        mask = (1 << (bound - 1).bit_length()) - 1
        while True:
            r = self.next_u64() & mask
            if r < bound:
                return r


def _subset_mask(rng: RandomSource, buf: list[int], ell: int) -> int:
    # partial Fisher-Yates over buf; buf[t] is final once visited
    m = len(buf)
    mask = 0
    for t in range(ell):
        j = t + rng.randbelow(m - t)
        buf[t], buf[j] = buf[j], buf[t]
        mask |= 1 << buf[t]
    return mask


def draw_cmcs_mask(n: int, rng: RandomSource) -> int:
    """Mask under the shared-coalition law P(S) = 1/((n+1) C(n,|S|))."""
    ell = rng.randbelow(n + 1)
    return _subset_mask(rng, list(range(n)), ell)


def draw_marginal_mask(idx: int, n: int, rng: RandomSource) -> int:
    """Mask over players other than 0-based ``idx``, P(S) = 1/(n C(n-1,|S|))."""
    ell = rng.randbelow(n)
    return _subset_mask(rng, [p for p in range(n) if p != idx], ell)


def draw_same_length_mask(idx: int, n: int, ell: int, rng: RandomSource) -> int:
    """Uniform size-``ell`` subset of the players other than ``idx``."""
    return _subset_mask(rng, [p for p in range(n) if p != idx], ell)


def draw_perm_indices(n: int, rng: RandomSource) -> list[int]:
    """Uniform permutation of 0..n-1 (Fisher-Yates)."""
    buf = list(range(n))
    for t in range(n):
        j = t + rng.randbelow(n - t)
        buf[t], buf[j] = buf[j], buf[t]
    return buf


def draw_cmcs_coalition(n: int, rng: RandomSource) -> Coalition:
    """Draw a coalition with probability 1/((n+1) * C(n, |S|))."""
    return Coalition(draw_cmcs_mask(n, rng), n)


def draw_marginal_coalition(player: int, n: int, rng: RandomSource) -> Coalition:
    """Draw S excluding ``player`` with probability 1/(n * C(n-1, |S|))."""
    if not 1 <= player <= n:
        raise ValueError(f"player {player} outside 1..{n}")
    return Coalition(draw_marginal_mask(player - 1, n, rng), n)


def draw_permutation(n: int, rng: RandomSource) -> tuple[int, ...]:
    """Uniform random ordering of players 1..n."""
    return tuple(p + 1 for p in draw_perm_indices(n, rng))


# ---------------------------------------------------------------------------
# scalar normal-distribution helpers

_SQRT_HALF = math.sqrt(0.5)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc; absolute error well below 1e-10 on |x|<=8."""
    return 0.5 * math.erfc(-x * _SQRT_HALF)


# Rational approximation coefficients for the normal quantile (Acklam 2003),
# refined below with one Halley step to full double precision.
_QA = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
       1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_QB = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
       6.680131188771972e+01, -1.328068155288572e+01)
_QC = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
       -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_QD = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
       3.754408661907416e+00)
_Q_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf`; raises DomainError outside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile requires 0 < p < 1, got {p}")
    if p < _Q_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5])
             / ((((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0))
    elif p <= 1.0 - _Q_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_QA[0] * r + _QA[1]) * r + _QA[2]) * r + _QA[3]) * r + _QA[4]) * r + _QA[5]) * q
             / (((((_QB[0] * r + _QB[1]) * r + _QB[2]) * r + _QB[3]) * r + _QB[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5])
              / ((((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0))
    # one Halley refinement against the erfc-based CDF
    e = normal_cdf(x) - p
    u = e * _SQRT_TWO_PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)
