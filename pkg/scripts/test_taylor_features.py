"""
Tests for the Gaussian Taylor basis and the Taylor-feature forecaster
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from datasets import synthetic_regression
from exact_kawv import ExactKAWV
from forecast_errors import CapacityError, InputError
from kernel_core import KernelSpec
from taylor_features import (TaylorBasis, TaylorKAWV, basis_size, choose_M, embed,
                             enumerate_indices, reconstruction_error, truncation_bound)


def _psi(t, x, sigma):
    return x ** t / (sigma ** t * math.sqrt(math.factorial(t))) * math.exp(-x ** 2 / (2 * sigma ** 2))


class TestEnumeration:
    def test_degree_one_in_two_dimensions(self):
        np.testing.assert_array_equal(enumerate_indices(1, 2), [[0, 0], [1, 0], [0, 1]])

    def test_degree_two_order(self):
        expected = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
        np.testing.assert_array_equal(enumerate_indices(2, 2), expected)

    def test_degree_zero(self):
        np.testing.assert_array_equal(enumerate_indices(0, 4), [[0, 0, 0, 0]])

    def test_size_and_uniqueness(self):
        for M, d in [(3, 1), (4, 3), (6, 2), (2, 5)]:
            indices = enumerate_indices(M, d)
            assert len(indices) == basis_size(M, d) == math.comb(M + d, d)
            assert len({tuple(k) for k in indices}) == len(indices)
            assert indices.sum(axis=1).max() == M
            assert np.all(np.diff(indices.sum(axis=1)) >= 0)

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            enumerate_indices(100, 10)

    def test_rejects_negative_degree(self):
        with pytest.raises(InputError):
            enumerate_indices(-1, 2)


class TestEmbedding:
    def test_matches_product_formula(self):
        sigma = 0.8
        basis = TaylorBasis(M=4, d=2, sigma=sigma)
        x = np.array([-0.7, 0.4])
        expected = [_psi(k[0], x[0], sigma) * _psi(k[1], x[1], sigma) for k in basis.indices]
        np.testing.assert_allclose(embed(basis, x), expected, rtol=1e-12, atol=1e-300)

    def test_signs_follow_odd_powers_of_negative_coordinates(self):
        values = TaylorBasis(M=3, d=1).embed([-0.5])
        assert values[0] > 0 and values[1] < 0 and values[2] > 0 and values[3] < 0

    def test_zero_input(self):
        values = TaylorBasis(M=3, d=2).embed([0.0, 0.0])
        np.testing.assert_array_equal(values, [1.0] + [0.0] * 9)

    def test_zero_coordinate_kills_its_powers(self):
        basis = TaylorBasis(M=2, d=2)
        values = basis.embed([0.0, 0.5])
        for k, value in zip(basis.indices, values):
            if k[0] > 0:
                assert value == 0.0
            else:
                assert value > 0.0

    def test_embed_many_rows(self):
        basis = TaylorBasis(M=3, d=2)
        X = np.random.default_rng(10).uniform(-1, 1, size=(6, 2))
        np.testing.assert_allclose(basis.embed_many(X), np.array([basis.embed(x) for x in X]))

    def test_rejects_bad_input(self):
        basis = TaylorBasis(M=2, d=2)
        with pytest.raises(InputError):
            basis.embed([0.0])
        with pytest.raises(InputError):
            basis.embed([0.0, np.nan])

    def test_large_degree_stays_finite(self):
        values = TaylorBasis(M=60, d=1, sigma=0.5).embed([3.0])
        assert np.all(np.isfinite(values))


class TestTruncation:
    def test_choose_M(self):
        assert choose_M(1.0, 1.0, 100, 1.0) == 10
        assert choose_M(2.0, 1.0, 10, 1.0) == 32
        assert choose_M(0.5, 1.0, 1000, 0.01) == math.ceil(2 * math.log(1e5))

    def test_truncation_bound_values(self):
        assert truncation_bound(3, 0.0, 1.0) == 0.0
        assert truncation_bound(1, 1.0, 1.0) == pytest.approx(0.5)
        assert truncation_bound(2, 2.0, 2.0) == pytest.approx(1.0 / 6.0)

    def test_reconstruction_converges(self):
        basis = TaylorBasis(M=20, d=2)
        rng = np.random.default_rng(11)
        for _ in range(20):
            x, x_prime = rng.uniform(-1, 1, size=(2, 2))
            assert reconstruction_error(basis, x, x_prime) < 1e-10

    def test_truncation_bound_holds(self):
        """1000 random pairs in [-1, 1]^d for d in 1..3 and M in 2..10"""
        rng = np.random.default_rng(12)
        for d in (1, 2, 3):
            X = rng.uniform(-1, 1, size=(1000, d))
            X_prime = rng.uniform(-1, 1, size=(1000, d))
            exact = np.exp(-np.sum((X - X_prime) ** 2, axis=1) / 2.0)
            for M in range(2, 11):
                basis = TaylorBasis(M=M, d=d)
                approx = np.sum(basis.embed_many(X) * basis.embed_many(X_prime), axis=1)
                bound = truncation_bound(M, math.sqrt(d), 1.0)
                assert np.all(np.abs(exact - approx) <= bound + 1e-14)
            assert reconstruction_error(TaylorBasis(M=2, d=d), X[0], X_prime[0]) <= truncation_bound(2, math.sqrt(d), 1.0) + 1e-14

    def test_feature_mass_below_one(self):
        rng = np.random.default_rng(21)
        for d in (1, 2, 3):
            X = rng.uniform(-1, 1, size=(200, d))
            previous = np.zeros(200)
            for M in range(0, 12):
                mass = np.sum(TaylorBasis(M=M, d=d).embed_many(X) ** 2, axis=1)
                assert np.all(mass <= 1.0 + 1e-12)
                assert np.all(mass >= previous - 1e-15)
                previous = mass
            assert np.all(mass > 0.99)
        assert np.sum(TaylorBasis(M=30, d=2).embed([1.0, -0.5]) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_known_values_at_one_half(self):
        basis = TaylorBasis(M=3, d=1)
        assert np.sum(basis.embed([0.5]) ** 2) == pytest.approx(0.999867, abs=1e-6)
        assert reconstruction_error(basis, [0.5], [0.5]) == pytest.approx(1.333e-4, rel=1e-3)

    def test_origin_is_reconstructed_exactly(self):
        for d in (1, 2, 4):
            for M in (0, 2, 7):
                assert reconstruction_error(TaylorBasis(M=M, d=d), np.zeros(d), np.zeros(d)) == 0.0

    def test_embedding_is_continuous(self):
        """Perturbations of 1e-9 move every feature by at most 1e-6 for ||x|| <= 3"""
        rng = np.random.default_rng(22)
        basis = TaylorBasis(M=8, d=2)
        directions = rng.standard_normal((100, 2))
        points = directions / np.linalg.norm(directions, axis=1, keepdims=True) * rng.uniform(0, 3, size=(100, 1))
        points = np.vstack([points, [[0.0, 0.0], [0.0, 2.5], [-3.0, 0.0], [1e-300, -1e-300]]])
        for x in points:
            shift = 1e-9 * rng.choice([-1.0, 1.0], size=2)
            assert np.max(np.abs(basis.embed(x + shift) - basis.embed(x))) <= 1e-6


class TestTaylorForecaster:
    def test_first_prediction_is_zero(self):
        forecaster = TaylorKAWV(KernelSpec(), 1.0, M=3, d=2)
        assert forecaster.step([0.3, 0.3]) == 0.0
        assert forecaster.r == 10

    def test_repeated_origin(self):
        for krr, expected in ((False, 1.0 / 3.0), (True, 0.5)):
            forecaster = TaylorKAWV(KernelSpec(), 1.0, M=4, d=2, krr=krr)
            assert forecaster.step([0.0, 0.0]) == 0.0
            forecaster.supply_label(1.0)
            assert forecaster.step([0.0, 0.0]) == pytest.approx(expected, abs=1e-12)

    def test_ridge_variant_is_primal_ridge_on_features(self):
        rng = np.random.default_rng(23)
        X = rng.uniform(-1, 1, size=(25, 2))
        y = np.sin(X.sum(axis=1))
        forecaster = TaylorKAWV(KernelSpec(), 0.5, M=3, d=2, krr=True)
        assert forecaster.name == 'taylor_krr'
        features = forecaster.basis.embed_many(X)
        for t in range(25):
            Phi = features[:t]
            w = np.linalg.solve(Phi.T @ Phi + 0.5 * np.eye(forecaster.r), Phi.T @ y[:t])
            assert forecaster.step(X[t]) == pytest.approx(features[t] @ w, abs=1e-10)
            forecaster.supply_label(y[t])

    def test_tracks_exact_forecaster(self):
        """d = 1, n = 100, y = sin(3x) + noise, sigma = lambda = 1, M = choose_M(1, 1, 100, 1)"""
        data = synthetic_regression(100, 1, seed=13, frequency=3.0, noise=0.1)
        spec, lam, B = KernelSpec(sigma=1.0), 1.0, 1.0
        M = choose_M(1.0, 1.0, 100, lam)
        assert M == 10

        taylor, exact = TaylorKAWV(spec, lam, M, 1), ExactKAWV(spec, lam)
        taylor_loss = exact_loss = 0.0
        for x, y in zip(data.X, data.y):
            taylor_loss += (taylor.step(x) - y) ** 2
            exact_loss += (exact.step(x) - y) ** 2
            taylor.supply_label(y)
            exact.supply_label(y)

        assert abs(taylor_loss - exact_loss) <= 4.0 / 9.0 * B ** 2 * math.log(1 + 1 / lam) + 1e-3


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
