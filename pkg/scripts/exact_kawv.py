#!/usr/bin/env python3
"""
Exact Kernel-AWV
Dual-form Kernel-AWV forecaster, recomputed from scratch at every round
"""

import logging
from typing import List

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from forecast_errors import InputError, NumericError
from kernel_core import KernelSpec, as_points, cross_gram, gram
from online_protocol import OnlineForecaster

logger = logging.getLogger(__name__)


def _spd_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(matrix, lower=False, check_finite=False)
    except LinAlgError as e:
        raise NumericError(f"Cholesky factorization failed: {e}")
    return cho_solve(factor, rhs, check_finite=False)


def batch_krr(spec: KernelSpec, X, Y, lam: float) -> np.ndarray:
    """alpha* = (K + lambda I)^-1 Y, the batch kernel ridge comparator"""
    if lam <= 0:
        raise InputError(f"lambda must be positive, got {lam!r}")
    points = as_points(X)
    targets = np.asarray(Y, dtype=float).reshape(-1)
    if points.shape[0] != targets.size:
        raise InputError(f"{points.shape[0]} inputs but {targets.size} labels")
    if targets.size == 0:
        return np.zeros(0)
    K = gram(spec, points)
    return _spd_solve(K + lam * np.eye(targets.size), targets)


def krr_predict(spec: KernelSpec, X, alpha: np.ndarray, Q) -> np.ndarray:
    """k(Q, X) alpha"""
    queries = as_points(Q)
    if len(alpha) == 0:
        return np.zeros(queries.shape[0])
    return cross_gram(spec, queries, X) @ alpha


class ExactKAWV(OnlineForecaster):
    """
    Kernel-AWV in dual form

    y_hat_t = k_t^T (K_tt + lambda I)^-1 (y_1, ..., y_{t-1}, 0)

    The trailing zero target encodes the f(x_t)^2 penalty. O(t^3) per round;
    this is the reference the projected forecasters are validated against.
    With krr=True the penalty is dropped and x_t is predicted by kernel ridge
    fitted on the first t - 1 examples only.
    """

    name = 'exact'

    def __init__(self, spec: KernelSpec, lam: float, dim: int = None, krr: bool = False):
        super().__init__(dim)
        if lam <= 0:
            raise InputError(f"lambda must be positive, got {lam!r}")
        self.spec = spec
        self.lam = float(lam)
        self.krr = krr
        self.inputs: List[np.ndarray] = []
        self.labels: List[float] = []
        if krr:
            self.name = 'krr'

    def _predict(self, x: np.ndarray) -> float:
        if self.krr:
            if not self.inputs:
                return 0.0
            previous = np.vstack(self.inputs)
            alpha = batch_krr(self.spec, previous, self.labels, self.lam)
            return float(krr_predict(self.spec, previous, alpha, x.reshape(1, -1))[0])
        X = np.vstack(self.inputs + [x])
        K = gram(self.spec, X)
        targets = np.append(np.asarray(self.labels, dtype=float), 0.0)
        weights = _spd_solve(K + self.lam * np.eye(len(targets)), targets)
        return float(K[-1] @ weights)

    def _step(self, x: np.ndarray) -> float:
        return self._predict(x)

    def _supply_label(self, x: np.ndarray, y: float) -> None:
        self.inputs.append(x)
        self.labels.append(y)

    def peek(self, x) -> float:
        if self.awaiting_label:
            return super().peek(x)
        return self._predict(self._check_input(x))

