#!/usr/bin/env python3
"""
Nystrom Kernel-AWV
Kernel-AWV projected on a leverage-sampled Nystrom dictionary, with incremental Cholesky factors
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from cholesky_updates import (border_solve, cholappend, choldowndate, cholupdate,
                              robust_cholesky, solve_normal)
from forecast_errors import ConfigError, NumericError
from kernel_core import KernelSpec, as_points, cross_gram
from online_protocol import OnlineForecaster

logger = logging.getLogger(__name__)

# largest tolerated drift of the grown factor, relative to the new diagonal entry of A
DOWNDATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class KorsConfig:
    """Online ridge leverage sampling parameters: approximation level, oversampling, inflation"""

    mu: float = 1.0
    beta: Optional[float] = None
    eps: float = 0.5
    delta: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"mu: must be positive, got {self.mu!r}")
        if self.beta is not None and not self.beta > 0:
            raise ConfigError(f"beta: must be positive, got {self.beta!r}")
        if not 0 < self.eps < 1:
            raise ConfigError(f"eps: must lie in (0, 1), got {self.eps!r}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta: must lie in (0, 1), got {self.delta!r}")

    def resolved_beta(self, n: Optional[int] = None) -> float:
        """beta if set, else 12 log(n / delta)"""
        if self.beta is not None:
            return float(self.beta)
        if not n:
            raise ConfigError("beta: unset, and the stream length n needed for 12 log(n / delta) is unknown")
        return 12.0 * math.log(n / self.delta)


def admission_probability(tau: float, beta: float) -> float:
    return min(1.0, beta * tau)


class KorsDictionary:
    """
    Growing set of stored inputs with the factor of K_II + mu I

    Points are never dropped. The factor is extended by one bordered column per
    admission, so a leverage query costs a single triangular solve.
    """

    def __init__(self, spec: KernelSpec, kors: KorsConfig):
        self.spec = spec
        self.kors = kors
        self.points: List[np.ndarray] = []
        self.step_indices: List[int] = []
        self.K_II = np.zeros((0, 0))
        self.factor_reg = np.zeros((0, 0))

    @property
    def size(self) -> int:
        return len(self.points)

    def kernel_column(self, x: np.ndarray) -> np.ndarray:
        if not self.points:
            return np.zeros(0)
        return cross_gram(self.spec, np.vstack(self.points), x.reshape(1, -1))[:, 0]

    def leverage(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """
        tau = min(1, (1 + eps) / mu * (k(x, x) - b^T (K_II + mu I)^-1 b))

        Also returns b = k(I, x) and the border solve s, reused on insertion.
        """
        b = self.kernel_column(x)
        s = border_solve(self.factor_reg, b)
        residual = max(self.spec.kappa ** 2 - float(s @ s), 0.0)
        tau = min(1.0, (1.0 + self.kors.eps) / self.kors.mu * residual)
        return tau, b, s

    def add(self, x: np.ndarray, step: int, b: np.ndarray, s: np.ndarray) -> None:
        m = self.size
        k_xx = self.spec.kappa ** 2
        K_II = np.empty((m + 1, m + 1))
        K_II[:m, :m] = self.K_II
        K_II[:m, m] = b
        K_II[m, :m] = b
        K_II[m, m] = k_xx

        try:
            self.factor_reg = cholappend(self.factor_reg, b, k_xx + self.kors.mu, s=s)
        except NumericError:
            logger.warning(f"leverage factor refactorized at step {step} (dictionary size {m + 1})")
            self.factor_reg = robust_cholesky(K_II + self.kors.mu * np.eye(m + 1))

        self.K_II = K_II
        self.points.append(x)
        self.step_indices.append(step)

    def nbytes(self) -> int:
        return self.K_II.nbytes + self.factor_reg.nbytes + sum(p.nbytes for p in self.points)


def build_dictionary(spec: KernelSpec, inputs, kors: KorsConfig, n: Optional[int] = None) -> KorsDictionary:
    """Run leverage sampling over a whole input sequence"""
    points = as_points(inputs)
    beta = kors.resolved_beta(n or points.shape[0])
    rng = np.random.default_rng(kors.seed)
    dictionary = KorsDictionary(spec, kors)
    for step, x in enumerate(points, start=1):
        tau, b, s = dictionary.leverage(x)
        if rng.random() < admission_probability(tau, beta):
            dictionary.add(x, step, b, s)
    logger.info(f"dictionary built over {points.shape[0]} inputs: {dictionary.size} points")
    return dictionary


class NystromKAWV(OnlineForecaster):
    """
    Kernel-AWV restricted to span{phi(x) : x in I_t}

    R^T R = A_t = K_{t,I}^T K_{t,I} + lambda K_II with the current unlabeled row
    already included; c = K_{t,I}^T (y_1, ..., y_{t-1}, 0). Each round runs
    leverage sampling first, then adds the row a_t = k(I, x_t) to the factor
    and predicts a_t^T (R^T R)^-1 c.

    Passing a fixed dictionary gives the beforehand variant: no sampling, no growth.
    With krr=True the row a_t joins the factor only once y_t is known, so the
    prediction is projected kernel ridge on the first t - 1 examples.
    """

    name = 'nystrom'

    def __init__(self, spec: KernelSpec, lam: float, kors: KorsConfig, n: Optional[int] = None,
                 dim: Optional[int] = None, dictionary: Optional[KorsDictionary] = None,
                 krr: bool = False):
        super().__init__(dim)
        if not lam > 0:
            raise ConfigError(f"lambda: must be positive, got {lam!r}")
        self.spec = spec
        self.lam = float(lam)
        self.kors = kors
        self.fixed = dictionary is not None
        self.beta = None if self.fixed else kors.resolved_beta(n)
        self.rng = np.random.default_rng(kors.seed)
        self.dictionary = dictionary if self.fixed else KorsDictionary(spec, kors)
        self.R = robust_cholesky(self.lam * self.dictionary.K_II)
        self.c = np.zeros(self.dictionary.size)
        self.inputs: List[np.ndarray] = []
        self.labels: List[float] = []
        self.fallback_count = 0
        self.krr = krr
        self._row = np.zeros(0)
        if self.fixed:
            self.name = 'nystrom_beforehand'
        if krr:
            self.name += '_krr'

    @classmethod
    def beforehand(cls, spec: KernelSpec, lam: float, inputs, kors: KorsConfig,
                   n: Optional[int] = None, krr: bool = False) -> 'NystromKAWV':
        """Sample the dictionary over all inputs first, then stream with that fixed subspace"""
        points = as_points(inputs)
        dictionary = build_dictionary(spec, points, kors, n)
        dim = points.shape[1] if points.shape[0] else None
        return cls(spec, lam, kors, n=n, dim=dim, dictionary=dictionary, krr=krr)

    @property
    def dict_size(self) -> int:
        return self.dictionary.size

    def leverage_estimate(self, x) -> float:
        return self.dictionary.leverage(np.asarray(x, dtype=float))[0]

    def admit(self, tau: float) -> bool:
        return bool(self.rng.random() < admission_probability(tau, self.beta))

    def grow_dictionary(self, x: np.ndarray, b: np.ndarray, s: np.ndarray) -> None:
        """
        Border A with the new dictionary column over the rows x_1..x_{t-1}

        cross = K_{t-1,I}^T kappa + lambda b, corner = kappa^T kappa + lambda k(x, x),
        applied as the pair u u^T - v v^T with u = (cross / (1 + g), g),
        v = (cross / (1 + g), -1), g = sqrt(1 + corner).
        """
        step = self.t + 1
        m = self.dictionary.size
        K_prev = np.zeros((len(self.inputs), m))
        kappa = np.zeros(len(self.inputs))
        if self.inputs:
            previous = np.vstack(self.inputs)
            kappa = cross_gram(self.spec, previous, x.reshape(1, -1))[:, 0]
            if m:
                K_prev = cross_gram(self.spec, previous, np.vstack(self.dictionary.points))

        cross = K_prev.T @ kappa + self.lam * b
        corner = float(kappa @ kappa) + self.lam * self.spec.kappa ** 2
        g = math.sqrt(1.0 + corner)
        u = np.append(cross / (1.0 + g), g)
        v = np.append(cross / (1.0 + g), -1.0)

        self.dictionary.add(x, step, b, s)

        padded = np.zeros((m + 1, m + 1))
        padded[:m, :m] = self.R
        expected_border = np.append(cross, corner)
        expected_diagonal = np.sum(self.R ** 2, axis=0)
        try:
            R = choldowndate(cholupdate(padded, u), v)
            drift = max(np.max(np.abs(R.T @ R[:, m] - expected_border), initial=0.0),
                        np.max(np.abs(np.sum(R[:, :m] ** 2, axis=0) - expected_diagonal), initial=0.0))
            if drift > DOWNDATE_TOLERANCE * max(corner, 1.0):
                raise NumericError(f"bordered factor drifted by {drift:.2e}")
            self.R = R
        except NumericError as e:
            self.fallback_count += 1
            logger.warning(f"step {step}: bordered downdate failed ({e}); refactorizing A densely")
            K_grown = np.column_stack([K_prev, kappa])
            self.R = robust_cholesky(K_grown.T @ K_grown + self.lam * self.dictionary.K_II)

        labels = np.asarray(self.labels, dtype=float)
        self.c = np.append(self.c, float(kappa @ labels))
        logger.debug(f"step {step}: dictionary grew to {m + 1} points")

    def _step(self, x: np.ndarray) -> float:
        if not self.fixed:
            tau, b, s = self.dictionary.leverage(x)
            if self.admit(tau):
                self.grow_dictionary(x, b, s)

        self.inputs.append(x)
        row = self.dictionary.kernel_column(x)
        self._row = row
        if row.size == 0:
            return 0.0
        if not self.krr:
            self.R = cholupdate(self.R, row)
        alpha = solve_normal(self.R, self.c)
        return float(row @ alpha)

    def _supply_label(self, x: np.ndarray, y: float) -> None:
        if self._row.size:
            if self.krr:
                self.R = cholupdate(self.R, self._row)
            self.c = self.c + y * self._row
        self.labels.append(y)

    def dense_system(self) -> np.ndarray:
        """A_t rebuilt from scratch over every input in the factor (the pending one only without krr)"""
        m = self.dictionary.size
        if m == 0:
            return np.zeros((0, 0))
        rows = self.inputs[:-1] if self.krr and self.awaiting_label else self.inputs
        if not rows:
            return self.lam * self.dictionary.K_II
        K_tI = cross_gram(self.spec, np.vstack(rows), np.vstack(self.dictionary.points))
        return K_tI.T @ K_tI + self.lam * self.dictionary.K_II

    def factor_gram(self) -> np.ndarray:
        return self.R.T @ self.R

    def state_nbytes(self) -> int:
        return (self.R.nbytes + self.c.nbytes + self.dictionary.nbytes()
                + sum(x.nbytes for x in self.inputs) + 8 * len(self.labels))
