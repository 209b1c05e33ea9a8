import collections
import math
from fractions import Fraction

import numpy as np
import pytest

from shaptopk import (
    Coalition,
    DomainError,
    RandomSource,
    derive_seed,
    draw_cmcs_coalition,
    draw_marginal_coalition,
    draw_permutation,
    normal_cdf,
    normal_quantile,
)
from shaptopk.rng import draw_cmcs_mask, draw_marginal_mask

# chi-square critical value at significance 1e-3, 15 degrees of freedom
CHI2_999_DF15 = 37.69729821835383


class TestRandomSource:
    def test_equal_seeds_equal_draws(self):
        a, b = RandomSource(12345), RandomSource(12345)
        assert [a.next_u64() for _ in range(1000)] == [b.next_u64() for _ in range(1000)]

    def test_equal_seeds_equal_coalitions(self):
        a, b = RandomSource(777), RandomSource(777)
        for _ in range(10_000):
            assert draw_cmcs_mask(6, a) == draw_cmcs_mask(6, b)

    def test_state_roundtrip(self):
        rng = RandomSource(5)
        rng.next_u64()
        st = rng.getstate()
        seq = [rng.next_u64() for _ in range(10)]
        rng.setstate(st)
        assert [rng.next_u64() for _ in range(10)] == seq

    def test_derived_streams_differ(self):
        seeds = {derive_seed(42, s) for s in range(1000)}
        assert len(seeds) == 1000
        a = RandomSource(derive_seed(42, 0))
        b = RandomSource(derive_seed(42, 1))
        assert [a.next_u64() for _ in range(10)] != [b.next_u64() for _ in range(10)]

    def test_randbelow_range_and_degenerate(self, rng):
        assert rng.randbelow(1) == 0
        with pytest.raises(ValueError):
            rng.randbelow(0)
        vals = [rng.randbelow(7) for _ in range(5000)]
        assert set(vals) == set(range(7))

    def test_uniform_in_unit_interval(self, rng):
        vals = [rng.uniform() for _ in range(10_000)]
        assert all(0.0 <= v < 1.0 for v in vals)
        assert abs(np.mean(vals) - 0.5) < 0.02


class TestCoalitionLaws:
    def test_shared_law_sums_to_one_rationally(self):
        for n in range(1, 21):
            total = sum(
                Fraction(math.comb(n, s), (n + 1) * math.comb(n, s)) for s in range(n + 1)
            )
            assert total == 1

    def test_shared_law_n2_probabilities(self):
        # exact law: P(empty) = P(grand) = 1/3, each singleton 1/6
        rng = RandomSource(2718)
        draws = 300_000
        counts = collections.Counter(draw_cmcs_mask(2, rng) for _ in range(draws))
        for mask, p in ((0, 1 / 3), (1, 1 / 6), (2, 1 / 6), (3, 1 / 3)):
            sigma = math.sqrt(p * (1 - p) / draws)
            assert abs(counts[mask] / draws - p) < 3 * sigma

    def test_shared_law_size_classes_n4(self):
        rng = RandomSource(99)
        draws = 200_000
        sizes = collections.Counter(
            draw_cmcs_mask(4, rng).bit_count() for _ in range(draws)
        )
        sigma = math.sqrt(0.2 * 0.8 / draws)
        for s in range(5):
            assert abs(sizes[s] / draws - 0.2) < 3 * sigma

    def test_shared_law_chi_square_n4(self):
        # 16 cells against the exact law, 1e6 draws, significance 1e-3
        n, draws = 4, 1_000_000
        rng = RandomSource(31415)
        counts = collections.Counter(draw_cmcs_mask(n, rng) for _ in range(draws))
        stat = 0.0
        for mask in range(1 << n):
            p = 1.0 / ((n + 1) * math.comb(n, bin(mask).count("1")))
            expect = draws * p
            stat += (counts[mask] - expect) ** 2 / expect
        assert stat < CHI2_999_DF15

    def test_marginal_law_excludes_player(self):
        rng = RandomSource(7)
        for _ in range(2000):
            mask = draw_marginal_mask(2, 5, rng)
            assert not mask >> 2 & 1

    def test_marginal_law_n2(self):
        rng = RandomSource(11)
        draws = 200_000
        counts = collections.Counter(draw_marginal_mask(0, 2, rng) for _ in range(draws))
        sigma = math.sqrt(0.25 / draws)
        assert abs(counts[0] / draws - 0.5) < 3 * sigma
        assert abs(counts[2] / draws - 0.5) < 3 * sigma

    def test_coalition_wrappers(self, rng):
        c = draw_cmcs_coalition(5, rng)
        assert isinstance(c, Coalition) and c.n == 5
        c = draw_marginal_coalition(3, 5, rng)
        assert not c.contains(3)
        with pytest.raises(ValueError):
            draw_marginal_coalition(6, 5, rng)


class TestPermutations:
    def test_single_player_identity(self, rng):
        assert draw_permutation(1, rng) == (1,)

    def test_uniformity_n3(self):
        rng = RandomSource(1234)
        draws = 600_000
        counts = collections.Counter(draw_permutation(3, rng) for _ in range(draws))
        assert len(counts) == 6
        sigma = math.sqrt((1 / 6) * (5 / 6) / draws)
        for perm, c in counts.items():
            assert abs(c / draws - 1 / 6) < 3 * sigma

    def test_prefix_matches_marginal_law(self):
        # the predecessors of player 1 in a uniform permutation follow the
        # isolated marginal law: P(empty)=1/3, each singleton 1/6, pair 1/3
        rng = RandomSource(4321)
        draws = 300_000
        counts = collections.Counter()
        for _ in range(draws):
            perm = draw_permutation(3, rng)
            prefix = 0
            for p in perm:
                if p == 1:
                    break
                prefix |= 1 << (p - 1)
            counts[prefix] += 1
        law = {0: 1 / 3, 0b010: 1 / 6, 0b100: 1 / 6, 0b110: 1 / 3}
        for mask, p in law.items():
            sigma = math.sqrt(p * (1 - p) / draws)
            assert abs(counts[mask] / draws - p) < 3 * sigma


class TestNormal:
    def test_cdf_reference_values(self):
        assert normal_cdf(0.0) == 0.5
        assert abs(normal_cdf(1.96) - 0.97500210485177956) < 1e-12
        assert abs(normal_cdf(2.0) - 0.97724986805182079) < 1e-12

    def test_cdf_against_mpmath_grid(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        for x in np.linspace(-8, 8, 161):
            ref = float(0.5 * mp.erfc(-mp.mpf(float(x)) / mp.sqrt(2)))
            assert abs(normal_cdf(float(x)) - ref) <= 1e-10

    def test_cdf_monotone(self):
        xs = np.linspace(-8, 8, 2001)
        vals = [normal_cdf(float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_quantile_inverse_identity(self):
        for x in range(-3, 4):
            assert abs(normal_quantile(normal_cdf(float(x))) - x) < 1e-7
        for p in (1e-9, 1e-4, 0.025, 0.3, 0.5, 0.9, 0.999, 1 - 1e-9):
            assert abs(normal_cdf(normal_quantile(p)) - p) < 1e-8

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            normal_quantile(0.0)
        with pytest.raises(DomainError):
            normal_quantile(1.0)
