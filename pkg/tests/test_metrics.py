import math

import numpy as np
import pytest

from shaptopk import (
    Coalition,
    InvalidK,
    LengthMismatch,
    NotMultiple,
    SamePlayer,
    SizeError,
    binary_precision,
    covariance_formula,
    eligible_sets,
    exact_moments,
    exact_shapley,
    identification_lower_bound,
    inclusion_exclusion_error,
    make_airport_game,
    make_carrier_game,
    make_random_sou_game,
    make_unanimity_game,
    mse,
    predicted_mse_budget,
    predicted_mse_rounds,
    ratio_precision,
)

from conftest import random_table_game


def _law15_enumeration(game):
    """Dictionary-style independent enumeration of the shared-round law."""
    n = game.n
    out = []
    for mask in range(1 << n):
        w = 1.0 / ((n + 1) * math.comb(n, mask.bit_count()))
        deltas = [
            game.value(mask | (1 << i)) - game.value(mask & ~(1 << i)) for i in range(n)
        ]
        out.append((w, deltas))
    return out


class TestMse:
    def test_zero_on_equal(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_arithmetic(self):
        assert mse([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mse([1.0], [1.0, 2.0])


class TestPrecisions:
    def test_binary(self):
        elig = eligible_sets(np.array([4.0, 3, 2, 1]), 2)
        assert binary_precision(Coalition.from_players([1, 2], 4), elig) == 1
        assert binary_precision(Coalition.from_players([1, 3], 4), elig) == 0

    def test_binary_symmetric_game(self):
        phi = exact_shapley(make_unanimity_game(3))
        elig = eligible_sets(phi, 2)
        for pair in ([1, 2], [1, 3], [2, 3]):
            assert binary_precision(Coalition.from_players(pair, 3), elig) == 1

    def test_ratio(self):
        elig = eligible_sets(np.array([4.0, 3, 2, 1]), 2)
        assert ratio_precision(Coalition.from_players([1, 2], 4), elig) == 1.0
        assert ratio_precision(Coalition.from_players([1, 4], 4), elig) == 0.5

    def test_ratio_with_tie(self):
        elig = eligible_sets(np.array([1.0, 1.0, 0.0]), 1)
        assert ratio_precision(Coalition.from_players([2], 3), elig) == 1.0

    def test_wrong_cardinality(self):
        elig = eligible_sets(np.array([4.0, 3, 2, 1]), 2)
        with pytest.raises(InvalidK):
            binary_precision(Coalition.from_players([1], 4), elig)

    def test_order_and_equivalence_on_strict_gap(self):
        phi = np.array([0.9, 0.5, 0.1, -0.2])
        elig = eligible_sets(phi, 2)
        import itertools

        for combo in itertools.combinations(range(4), 2):
            k_hat = Coalition.from_players([c + 1 for c in combo], 4)
            b = binary_precision(k_hat, elig)
            r = ratio_precision(k_hat, elig)
            e = inclusion_exclusion_error(k_hat, phi, 2)
            assert 0 <= b <= r <= 1
            assert (b == 1) == (r == 1.0) == (e == 0.0)


class TestInclusionExclusionError:
    def test_eligible_is_zero(self):
        phi = np.array([0.5, 0.3, 0.2])
        assert inclusion_exclusion_error(Coalition.from_players([1], 3), phi, 1) == 0.0

    def test_single_swap_k1(self):
        phi = np.array([0.5, 0.3, 0.2])
        assert abs(inclusion_exclusion_error(Coalition.from_players([2], 3), phi, 1) - 0.2) < 1e-15

    def test_k2_mixed(self):
        phi = np.array([0.5, 0.3, 0.2])
        err = inclusion_exclusion_error(Coalition.from_players([1, 3], 3), phi, 2)
        assert abs(err - 0.1) < 1e-15

    def test_symmetric_game_always_zero(self):
        phi = np.full(8, 1 / 8)
        import itertools

        for combo in itertools.combinations(range(8), 3):
            k_hat = Coalition.from_players([c + 1 for c in combo], 8)
            assert inclusion_exclusion_error(k_hat, phi, 3) == 0.0


class TestExactMoments:
    def test_means_are_exact_values(self):
        for game in (make_airport_game([1, 2, 3]), make_random_sou_game(5, 6, 3)):
            m = exact_moments(game)
            assert np.allclose(m.phi, exact_shapley(game), atol=1e-10)

    def test_unanimity_closed_forms(self):
        for n in range(2, 8):
            m = exact_moments(make_unanimity_game(n))
            # each observation is a Bernoulli(1/n) indicator
            assert np.allclose(m.var, (1 / n) * (1 - 1 / n), atol=1e-12)
            assert np.allclose(m.cov[0, 1], 1 / (n + 1) - 1 / n**2, atol=1e-12)

    def test_matches_dictionary_enumeration(self):
        game = make_random_sou_game(4, 5, 8)
        m = exact_moments(game)
        law = _law15_enumeration(game)
        mean0 = math.fsum(w * d[0] for w, d in law)
        var0 = math.fsum(w * d[0] ** 2 for w, d in law) - mean0**2
        cov01 = math.fsum(w * d[0] * d[1] for w, d in law) - mean0 * math.fsum(
            w * d[1] for w, d in law
        )
        assert abs(m.phi[0] - mean0) < 1e-12
        assert abs(m.var[0] - var0) < 1e-12
        assert abs(m.cov[0, 1] - cov01) < 1e-12

    def test_difference_variance_identity(self):
        for seed in range(10):
            game = make_random_sou_game(2 + seed % 7, 6, 40 + seed)
            m = exact_moments(game)
            for i in range(game.n):
                for j in range(i + 1, game.n):
                    lhs = m.diff_var[i, j]
                    rhs = m.var[i] + m.var[j] - 2 * m.cov[i, j]
                    assert abs(lhs - rhs) < 1e-9

    def test_isolated_law_variance_equals_shared(self):
        # the observation of one player has the same law either way
        for seed in range(5):
            game = random_table_game(5, 60 + seed)
            m = exact_moments(game)
            assert np.allclose(m.var, m.var_isolated, atol=1e-10)

    def test_nonnegative_variances(self):
        game = make_random_sou_game(6, 10, 77)
        m = exact_moments(game)
        assert (m.var >= -1e-12).all()
        assert (m.diff_var >= -1e-12).all()

    def test_size_cap(self):
        with pytest.raises(SizeError):
            exact_moments(make_unanimity_game(21))


class TestCovarianceFormula:
    def test_unanimity_closed_form(self):
        assert abs(covariance_formula(make_unanimity_game(4), 1, 2) - 0.1375) < 1e-12
        assert abs(covariance_formula(make_unanimity_game(2), 1, 2) - 1 / 12) < 1e-12

    def test_matches_enumeration_oracle(self):
        for seed in range(10):
            n = 3 + seed % 4
            game = make_random_sou_game(n, 6, 200 + seed)
            m = exact_moments(game)
            for i, j in ((1, 2), (1, n), (2, n)):
                if i == j:
                    continue
                assert abs(covariance_formula(game, i, j) - m.cov[i - 1, j - 1]) < 1e-9

    def test_same_player_rejected(self):
        with pytest.raises(SamePlayer):
            covariance_formula(make_unanimity_game(3), 2, 2)


class TestIdentificationBound:
    def test_symmetric_two_player_degenerate(self):
        m = exact_moments(make_unanimity_game(2))
        res = identification_lower_bound(m, 100, 0.0, 1)
        # both singletons eligible, each term 1 - Phi(0)
        assert abs(res.raw - 1.0) < 1e-12
        assert res.clamped == 1.0

    def test_monotone_in_rounds_for_separated_game(self):
        m = exact_moments(make_airport_game([1, 2, 3]))
        vals = [identification_lower_bound(m, r, 0.0, 1).clamped for r in (1, 5, 25, 100)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_clamping(self):
        m = exact_moments(make_unanimity_game(4))
        res = identification_lower_bound(m, 1, 0.0, 2)
        assert 0.0 <= res.clamped <= 1.0
        # symmetric game: every pair argument is Phi(0), raw goes negative
        assert res.raw < res.clamped or res.raw == res.clamped

    def test_zero_variance_tie_contributes_half(self):
        # dummies outside the carrier tie exactly with zero variance
        game = make_carrier_game(3, [1])
        m = exact_moments(game)
        res = identification_lower_bound(m, 50, 0.0, 2)
        # eligible sets: {1,2} and {1,3}; cross pairs (1,j) separate surely,
        # the dummy-dummy pair is an exact tie -> Phi-argument 0
        assert abs(res.raw - 2 * (1 - 0.5)) < 1e-6


class TestMsePredictions:
    def test_round_budget_identity(self):
        game = make_random_sou_game(5, 6, 5)
        m = exact_moments(game)
        for rounds in (1, 10, 400):
            a = predicted_mse_rounds(m, rounds)
            b = predicted_mse_budget(m, (game.n + 1) * rounds)
            assert abs(a - b) < 1e-15

    def test_doubling_budget_halves(self):
        m = exact_moments(make_unanimity_game(8))
        a = predicted_mse_budget(m, 9 * 100)
        b = predicted_mse_budget(m, 9 * 200)
        assert abs(a - 2 * b) < 1e-15

    def test_not_multiple(self):
        m = exact_moments(make_unanimity_game(4))
        with pytest.raises(NotMultiple):
            predicted_mse_budget(m, 7)
        with pytest.raises(NotMultiple):
            predicted_mse_budget(m, 0)
