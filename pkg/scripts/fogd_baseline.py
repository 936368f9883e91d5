#!/usr/bin/env python3
"""
Fourier Online Gradient Descent
Random Fourier feature baseline trained by online gradient descent on the square loss
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.kernel_approximation import RBFSampler

from forecast_errors import ConfigError
from kernel_core import KernelSpec
from online_protocol import OnlineForecaster

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FogdConfig:
    D: int = 1000
    eta: Optional[float] = None
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.D < 1:
            raise ConfigError(f"D: must be at least 1, got {self.D!r}")
        if self.eta is not None and not self.eta >= 0:
            raise ConfigError(f"eta: must be nonnegative, got {self.eta!r}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma: must be positive, got {self.sigma!r}")

    def resolved_eta(self, n: Optional[int] = None) -> float:
        """eta if set, else 1 / sqrt(n)"""
        if self.eta is not None:
            return float(self.eta)
        if not n:
            raise ConfigError("eta: unset, and the stream length n needed for 1/sqrt(n) is unknown")
        return 1.0 / math.sqrt(n)


def ogd_update(theta: np.ndarray, z: np.ndarray, y_hat: float, y: float, eta: float) -> np.ndarray:
    """theta - eta * 2 (y_hat - y) z"""
    return theta - eta * 2.0 * (y_hat - y) * z


class FogdForecaster(OnlineForecaster):
    """
    Linear model on D random Fourier features z(x) = sqrt(2/D) cos(W x + b)

    Frequencies and phases come from scikit-learn's RBFSampler and stay fixed;
    only the weights move.
    """

    name = 'fogd'

    def __init__(self, config: FogdConfig, d: int, n: Optional[int] = None):
        super().__init__(d)
        self.config = config
        self.eta = config.resolved_eta(n)
        spec = KernelSpec(sigma=config.sigma)
        sampler = RBFSampler(gamma=spec.gamma, n_components=config.D, random_state=config.seed)
        sampler.fit(np.zeros((1, d)))
        self.frequencies = sampler.random_weights_.T.copy()  # D x d
        self.phases = sampler.random_offset_.copy()
        self.weights = np.zeros(config.D)
        self._z = np.zeros(config.D)
        self._prediction = 0.0

    def embed(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return math.sqrt(2.0 / self.config.D) * np.cos(self.frequencies @ x + self.phases)

    def _step(self, x: np.ndarray) -> float:
        self._z = self.embed(x)
        self._prediction = float(self.weights @ self._z)
        return self._prediction

    def _supply_label(self, x: np.ndarray, y: float) -> None:
        self.weights = ogd_update(self.weights, self._z, self._prediction, y, self.eta)

    def peek(self, x) -> float:
        if self.awaiting_label:
            return super().peek(x)
        return float(self.weights @ self.embed(self._check_input(x)))
