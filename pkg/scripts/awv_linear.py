#!/usr/bin/env python3
"""
Linear AWV Recursion
Finite-dimensional Azoury-Warmuth-Vovk ridge forecaster with Sherman-Morrison updates
"""

import logging
from typing import Callable

import numpy as np

from forecast_errors import InputError
from online_protocol import OnlineForecaster

logger = logging.getLogger(__name__)

# Sherman-Morrison drifts away from symmetry; average with the transpose this often
SYMMETRIZE_EVERY = 1000


class AwvState(OnlineForecaster):
    """
    Ridge recursion over r-dimensional feature vectors

    A_t = lambda I + sum_{s<=t} v_s v_s^T is kept as its inverse, b_t = sum_{s<t} y_s v_s.
    The current feature vector enters A before predicting, unlike plain ridge:
    that ordering is the f(x_t)^2 penalty of AWV. With krr=True v_t enters A only
    together with its label, which is plain online ridge regression.
    Predictions are never clipped.
    """

    name = 'awv'

    def __init__(self, r: int, lam: float, krr: bool = False):
        if r < 1:
            raise InputError(f"feature dimension r must be at least 1, got {r!r}")
        if not lam > 0:
            raise InputError(f"lambda must be positive, got {lam!r}")
        super().__init__(dim=r)
        self.r = r
        self.lam = float(lam)
        self.krr = krr
        self.A_inv = np.eye(r) / self.lam
        self.b = np.zeros(r)
        self._updates = 0

    def _absorb(self, v: np.ndarray) -> None:
        Av = self.A_inv @ v
        self.A_inv -= np.outer(Av, Av) / (1.0 + v @ Av)
        self._updates += 1
        if self._updates % SYMMETRIZE_EVERY == 0:
            self.A_inv = 0.5 * (self.A_inv + self.A_inv.T)

    def _step(self, v: np.ndarray) -> float:
        if not self.krr:
            self._absorb(v)
        return float(v @ (self.A_inv @ self.b))

    def _supply_label(self, v: np.ndarray, y: float) -> None:
        if self.krr:
            self._absorb(v)
        self.b += y * v

    def peek(self, v) -> float:
        if self.awaiting_label:
            return super().peek(v)
        v = self._check_input(v)
        Av = self.A_inv @ v
        if self.krr:
            return float(Av @ self.b)
        # v^T (A + v v^T)^-1 b = q / (1 + s)
        return float((Av @ self.b) / (1.0 + v @ Av))


def awv_init(r: int, lam: float, krr: bool = False) -> AwvState:
    """A_0^-1 = I / lambda, b_0 = 0"""
    return AwvState(r, lam, krr)


class EmbeddedAWV(OnlineForecaster):
    """AWV run on top of a fixed feature map x -> v(x) in R^r"""

    name = 'embedded_awv'

    def __init__(self, feature_map: Callable[[np.ndarray], np.ndarray], r: int, lam: float,
                 dim: int = None, krr: bool = False):
        super().__init__(dim)
        self.feature_map = feature_map
        self.awv = awv_init(r, lam, krr)

    @property
    def r(self) -> int:
        return self.awv.r

    def _step(self, x: np.ndarray) -> float:
        return self.awv.step(self.feature_map(x))

    def _supply_label(self, x: np.ndarray, y: float) -> None:
        self.awv.supply_label(y)

    def peek(self, x) -> float:
        if self.awaiting_label:
            return super().peek(x)
        return self.awv.peek(self.feature_map(self._check_input(x)))
