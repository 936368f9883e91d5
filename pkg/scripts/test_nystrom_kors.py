"""
Tests for leverage-sampled dictionaries and the Nystrom Kernel-AWV forecaster
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from exact_kawv import ExactKAWV, batch_krr, krr_predict
from forecast_errors import ConfigError
from kernel_core import KernelSpec, effective_dimension, gram
from nystrom_kors import (KorsConfig, KorsDictionary, NystromKAWV, admission_probability,
                          build_dictionary)

SPEC = KernelSpec(sigma=1.0)


def _spread_points(n=50, seed=14):
    """Shuffled, jittered unit grid in R^2: every pair at least 0.7 apart"""
    rng = np.random.default_rng(seed)
    grid = np.array([(i, j) for i in range(-4, 4) for j in range(-3, 4)], dtype=float)
    rng.shuffle(grid)
    return grid[:n] + rng.uniform(-0.15, 0.15, size=(n, 2))


def _labels(X, seed=15):
    rng = np.random.default_rng(seed)
    return np.clip(np.sin(X.sum(axis=1)) + 0.1 * rng.standard_normal(len(X)), -1, 1)


class TestLeverage:
    def test_empty_dictionary(self):
        assert KorsDictionary(SPEC, KorsConfig(mu=1.0, eps=0.5)).leverage(np.zeros(2))[0] == 1.0
        tau = KorsDictionary(SPEC, KorsConfig(mu=100.0, eps=0.5)).leverage(np.zeros(2))[0]
        assert tau == pytest.approx(0.015)

    def test_duplicate_of_stored_point(self):
        dictionary = KorsDictionary(SPEC, KorsConfig(mu=1.0, eps=0.5))
        x = np.zeros(2)
        tau, b, s = dictionary.leverage(x)
        dictionary.add(x, 1, b, s)
        assert dictionary.leverage(x)[0] == pytest.approx(0.75)

    def test_admission_probability(self):
        assert admission_probability(1.0, 12.0) == 1.0
        assert admission_probability(0.0, 12.0) == 0.0
        assert admission_probability(0.01, 12.0) == pytest.approx(0.12)

    def test_dictionary_factor_matches_gram(self):
        dictionary = build_dictionary(SPEC, _spread_points(), KorsConfig(mu=0.5, beta=1.0, seed=3))
        K_II = gram(SPEC, np.vstack(dictionary.points))
        np.testing.assert_allclose(dictionary.K_II, K_II, atol=1e-12)
        R = dictionary.factor_reg
        np.testing.assert_allclose(R.T @ R, K_II + 0.5 * np.eye(dictionary.size), atol=1e-10)
        assert dictionary.step_indices == sorted(dictionary.step_indices)

    def test_theory_beta(self):
        assert KorsConfig(beta=None, delta=0.1).resolved_beta(100) == pytest.approx(12 * math.log(1000))
        with pytest.raises(ConfigError):
            KorsConfig(beta=None).resolved_beta(None)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ConfigError):
            KorsConfig(eps=1.0)
        with pytest.raises(ConfigError):
            KorsConfig(mu=0.0)
        with pytest.raises(ConfigError):
            NystromKAWV(SPEC, 1.0, KorsConfig(beta=None))


class TestGrowth:
    def test_first_point_always_admitted(self):
        for seed in range(5):
            forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=1.0, beta=1.0, seed=seed))
            assert forecaster.step([0.2, -0.4]) == 0.0
            assert forecaster.dict_size == 1

    def test_first_growth_factor(self):
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=1.0, beta=1.0))
        forecaster.step([0.0])
        np.testing.assert_allclose(forecaster.R, [[math.sqrt(2.0)]])
        forecaster.supply_label(0.0)
        np.testing.assert_array_equal(forecaster.c, [0.0])

    def test_repeated_point_with_fixed_dictionary(self):
        dictionary = KorsDictionary(SPEC, KorsConfig())
        dictionary.add(np.zeros(1), 1, np.zeros(0), np.zeros(0))
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(), dim=1, dictionary=dictionary)
        assert forecaster.step([0.0]) == 0.0
        forecaster.supply_label(1.0)
        np.testing.assert_allclose(forecaster.c, [1.0])
        assert forecaster.step([0.0]) == pytest.approx(1.0 / 3.0)
        assert len(forecaster.labels) == forecaster.t - 1

    def test_dictionary_never_shrinks(self):
        rng = np.random.default_rng(16)
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=0.1, beta=1.0, seed=1))
        sizes = []
        for x in rng.uniform(-1, 1, size=(200, 2)):
            forecaster.step(x)
            forecaster.supply_label(0.1)
            sizes.append(forecaster.dict_size)
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))
        assert sizes[-1] <= 200


class TestEquivalence:
    def test_full_dictionary_matches_exact(self):
        """mu = 1e-8 admits every point, so the subspace is the span of all data"""
        X = _spread_points()
        y = _labels(X)
        nystrom = NystromKAWV(SPEC, 1.0, KorsConfig(mu=1e-8, beta=1e6, seed=0))
        exact = ExactKAWV(SPEC, 1.0)
        for t, (x, label) in enumerate(zip(X, y), start=1):
            assert nystrom.step(x) == pytest.approx(exact.step(x), abs=1e-6)
            assert nystrom.dict_size == t
            nystrom.supply_label(label)
            exact.supply_label(label)

    def test_beforehand_full_dictionary_matches_exact(self):
        X = _spread_points()
        y = _labels(X)
        beforehand = NystromKAWV.beforehand(SPEC, 1.0, X, KorsConfig(mu=1e-8, beta=1e6, seed=0))
        assert beforehand.dict_size == 50
        assert beforehand.name == 'nystrom_beforehand'
        exact = ExactKAWV(SPEC, 1.0)
        for x, label in zip(X, y):
            assert beforehand.step(x) == pytest.approx(exact.step(x), abs=1e-6)
            assert beforehand.dict_size == 50
            beforehand.supply_label(label)
            exact.supply_label(label)

    @pytest.mark.parametrize("beforehand", [False, True])
    def test_full_dictionary_ridge_variant_matches_batch_ridge(self, beforehand):
        X = _spread_points()
        y = _labels(X)
        kors = KorsConfig(mu=1e-8, beta=1e6, seed=0)
        if beforehand:
            projected = NystromKAWV.beforehand(SPEC, 1.0, X, kors, krr=True)
            assert projected.name == 'nystrom_beforehand_krr'
        else:
            projected = NystromKAWV(SPEC, 1.0, kors, krr=True)
            assert projected.name == 'nystrom_krr'
        assert projected.step(X[0]) == 0.0
        projected.supply_label(y[0])
        for t in range(1, len(X)):
            expected = krr_predict(SPEC, X[:t], batch_krr(SPEC, X[:t], y[:t], 1.0), X[t:t + 1])[0]
            assert projected.step(X[t]) == pytest.approx(expected, abs=1e-6)
            projected.supply_label(y[t])

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(17)
        X = rng.uniform(-1, 1, size=(100, 2))
        runs = []
        for _ in range(2):
            forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=0.3, beta=1.0, seed=9))
            predictions = []
            for x in X:
                predictions.append(forecaster.step(x))
                forecaster.supply_label(0.5)
            runs.append((predictions, forecaster.dictionary.step_indices))
        assert runs[0] == runs[1]

    def test_peek_leaves_state_alone(self):
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=0.5, beta=1.0))
        forecaster.step([0.1, 0.1])
        forecaster.supply_label(0.3)
        size, R = forecaster.dict_size, forecaster.R.copy()
        forecaster.peek([0.9, -0.9])
        assert forecaster.dict_size == size and forecaster.t == 1
        np.testing.assert_array_equal(forecaster.R, R)


class TestFactorConsistency:
    @pytest.mark.parametrize("mu, n", [(1.0, 500), (0.05, 200)])
    def test_factor_tracks_dense_system(self, mu, n):
        rng = np.random.default_rng(18)
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=mu, beta=1.0, seed=2))
        for x in rng.uniform(-1, 1, size=(n, 2)):
            forecaster.step(x)
            A = forecaster.dense_system()
            error = np.linalg.norm(forecaster.factor_gram() - A) / np.linalg.norm(A)
            assert error <= 1e-6
            forecaster.supply_label(rng.uniform(-1, 1))

    def test_ridge_variant_factor_excludes_pending_row(self):
        rng = np.random.default_rng(20)
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=0.1, beta=1.0, seed=3), krr=True)
        for x in rng.uniform(-1, 1, size=(150, 2)):
            forecaster.step(x)
            A = forecaster.dense_system()
            assert np.linalg.norm(forecaster.factor_gram() - A) <= 1e-6 * np.linalg.norm(A)
            forecaster.supply_label(rng.uniform(-1, 1))
            A = forecaster.dense_system()
            assert np.linalg.norm(forecaster.factor_gram() - A) <= 1e-6 * np.linalg.norm(A)

    def test_memory_is_reported(self):
        forecaster = NystromKAWV(SPEC, 1.0, KorsConfig(mu=0.5, beta=1.0))
        before = forecaster.state_nbytes()
        for x in np.random.default_rng(19).uniform(-1, 1, size=(20, 2)):
            forecaster.step(x)
            forecaster.supply_label(0.0)
        assert forecaster.state_nbytes() > before
        assert forecaster.fallback_count >= 0


def test_dictionary_budget():
    """n = 2000 uniform on [-1, 1]^2, mu = 1, delta = 0.1: |I_n| <= 9 d_eff(mu) log(2n/delta)^2"""
    n, mu, delta = 2000, 1.0, 0.1
    log_term = math.log(2 * n / delta)
    for seed in range(5):
        X = np.random.default_rng(100 + seed).uniform(-1, 1, size=(n, 2))
        kors = KorsConfig(mu=mu, beta=12 * log_term, delta=delta, seed=seed)
        dictionary = build_dictionary(SPEC, X, kors)
        d_eff = effective_dimension(gram(SPEC, X), mu)
        assert dictionary.size <= 9 * d_eff * log_term ** 2


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
