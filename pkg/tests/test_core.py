import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cmiknn.core import (
    EULER_GAMMA,
    CITestConfig,
    ConfigError,
    DomainError,
    TieError,
    as_block,
    digamma,
    digamma_table,
    rank_transform,
)


def harmonic_digamma(k):
    # psi(k) = H_{k-1} - gamma with the harmonic number summed exactly
    return float(sum(Fraction(1, j) for j in range(1, k)) - Fraction(EULER_GAMMA))


class TestDigamma:
    @pytest.mark.parametrize(
        "x, expected",
        [(1, -0.5772156649015329), (2, 0.4227843350984671), (10, 2.2517525890667214)],
    )
    def test_examples(self, x, expected):
        assert abs(digamma(x) - expected) <= 1e-10

    def test_euler_gamma_constant(self):
        assert EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-16)

    @pytest.mark.parametrize("k", [1, 2, 3, 7, 50, 333, 1000])
    def test_against_exact_harmonic_sum(self, k):
        assert abs(digamma(k) - harmonic_digamma(k)) <= 1e-12

    @pytest.mark.parametrize("x", [0.5] + list(range(1, 101)))
    def test_recurrence(self, x):
        assert abs(digamma(x + 1) - digamma(x) - 1 / x) <= 1e-12

    @given(st.floats(min_value=1e-3, max_value=1e4, allow_nan=False))
    def test_matches_scipy_on_reals(self, x):
        assert digamma(x) == pytest.approx(special.digamma(x), abs=1e-10, rel=1e-13)

    def test_half_integer(self):
        # psi(1/2) = -gamma - 2 ln 2
        assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-13)

    def test_array_input(self):
        x = np.array([[1.0, 2.5], [10.0, 0.25]])
        out = digamma(x)
        assert out.shape == x.shape
        np.testing.assert_allclose(out, special.digamma(x), atol=1e-12)

    @pytest.mark.parametrize("bad", [0, -1, -0.5, float("nan"), [1.0, 0.0]])
    def test_domain_error(self, bad):
        with pytest.raises(DomainError):
            digamma(bad)

    def test_table(self):
        t = digamma_table(20)
        assert np.isnan(t[0])
        np.testing.assert_allclose(t[1:], special.digamma(np.arange(1, 21)), atol=1e-13)


class TestRankTransform:
    def test_descending_ranks(self):
        out = rank_transform([0.5, 2.0, 1.0], noise_amp=0)
        np.testing.assert_array_equal(out[:, 0], [3, 1, 2])

    def test_single_sample(self):
        np.testing.assert_array_equal(rank_transform([7.0], noise_amp=1e-6, rng=0), [[1]])

    def test_tie_broken_by_noise(self):
        out = rank_transform([1.0, 1.0], noise_amp=1e-6, rng=3)[:, 0]
        assert sorted(out) == [1, 2]

    def test_constant_column_without_noise(self):
        with pytest.raises(TieError):
            rank_transform([[4.0], [4.0], [4.0]], noise_amp=0)

    def test_partial_tie_without_noise(self):
        with pytest.raises(TieError):
            rank_transform([1.0, 2.0, 2.0], noise_amp=0)

    def test_columns_are_permutations(self):
        rng = np.random.default_rng(0)
        data = np.round(rng.standard_normal((300, 4)), 1)  # plenty of ties
        out = rank_transform(data, noise_amp=1e-6, rng=1)
        for j in range(4):
            np.testing.assert_array_equal(np.sort(out[:, j]), np.arange(1, 301))

    def test_deterministic_given_seed(self):
        data = np.round(np.random.default_rng(0).standard_normal((50, 2)), 1)
        a = rank_transform(data, 1e-6, rng=42)
        b = rank_transform(data, 1e-6, rng=42)
        np.testing.assert_array_equal(a, b)

    def test_empty_conditioning_block(self):
        assert rank_transform(np.empty((5, 0)), 1e-6, rng=0).shape == (5, 0)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=40, unique=True))
    def test_rank_of_ranks(self, values):
        # ranks are descending, so re-ranking reverses them and a third pass restores them
        once = rank_transform(values, noise_amp=0)
        twice = rank_transform(once, noise_amp=0)
        np.testing.assert_array_equal(twice, len(values) + 1 - once)
        np.testing.assert_array_equal(rank_transform(twice, noise_amp=0), once)

    @settings(max_examples=50)
    @given(st.lists(st.integers(-500, 500), min_size=2, max_size=40, unique=True))
    def test_monotone_invariance(self, values):
        # separated values so the maps below cannot collide in floating point
        x = np.array(values) / 100.0
        base = rank_transform(x, noise_amp=0)
        increasing = rank_transform(np.arctan(x) + x**3, noise_amp=0)
        decreasing = rank_transform(-np.exp(x), noise_amp=0)
        np.testing.assert_array_equal(increasing, base)
        np.testing.assert_array_equal(decreasing, len(x) + 1 - base)


class TestBlocksAndConfig:
    def test_as_block_promotes_vectors(self):
        assert as_block([1.0, 2.0]).shape == (2, 1)

    def test_as_block_rejects_nan(self):
        with pytest.raises(ValueError):
            as_block([1.0, np.nan])

    def test_as_block_zero_columns(self):
        with pytest.raises(ValueError):
            as_block(np.empty((3, 0)))
        assert as_block(np.empty((3, 0)), allow_empty=True).shape == (3, 0)

    def test_config_defaults(self):
        cfg = CITestConfig()
        assert (cfg.k_perm, cfg.B, cfg.noise_amp) == (5, 1000, 1e-6)
        assert cfg.resolve(1000).k_cmi == 200

    @pytest.mark.parametrize(
        "kwargs", [{"k_cmi": 0}, {"k_perm": 0}, {"B": 0}, {"seed": -1}, {"seed": 2**64}, {"noise_amp": -1}, {"workers": 0}]
    )
    def test_config_bounds(self, kwargs):
        with pytest.raises(ConfigError):
            CITestConfig(**kwargs)

    def test_resolve_needs_enough_samples(self):
        with pytest.raises(ConfigError):
            CITestConfig(k_cmi=10).resolve(10)
        with pytest.raises(ConfigError):
            CITestConfig(k_cmi=2, k_perm=11).resolve(10)
