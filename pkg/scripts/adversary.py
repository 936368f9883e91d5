#!/usr/bin/env python3
"""
Greedy Grid Adversary
Builds a stream by picking, at every round, the grid pair that most hurts the forecaster relative to kernel ridge
"""

import itertools
import logging
from typing import Sequence

import numpy as np

from benchmark_runner import build_forecaster
from datasets import Dataset
from exact_kawv import batch_krr, krr_predict
from forecast_errors import CapacityError, ConfigError, InputError
from kawv_config import HarnessConfig
from kernel_core import KernelSpec

logger = logging.getLogger(__name__)

MAX_GRID_EVALUATIONS = 1_000_000


def grid_evaluations(d: int, grid_points_per_dim: int, y_grid: Sequence[float]) -> int:
    """Candidate pairs scored per round: g^d * |y_grid|"""
    return grid_points_per_dim ** d * len(y_grid)


def input_grid(d: int, grid_points_per_dim: int) -> np.ndarray:
    """Lexicographic product of linspace(-1, 1, g) over d coordinates"""
    axis = np.linspace(-1.0, 1.0, grid_points_per_dim)
    return np.array(list(itertools.product(axis, repeat=d)))


def adversary_generate(config: HarnessConfig, n: int, grid_points_per_dim: int,
                       y_grid: Sequence[float], d: int = 1) -> Dataset:
    """
    Greedy adversarial stream of length n for the forecaster named by config

    Round t maximises (y_hat_t(x) - y)^2 - (f_t(x) - y)^2 over the grid, where
    f_t is batch kernel ridge on the first t-1 chosen pairs. Ties go to the
    first pair in (x lexicographic, y ascending) order.
    """
    if n < 0 or d < 1 or grid_points_per_dim < 1 or len(y_grid) == 0:
        raise InputError(f"need n >= 0, d >= 1, g >= 1 and a nonempty y grid "
                         f"(got n={n}, d={d}, g={grid_points_per_dim}, |y|={len(y_grid)})")
    evaluations = grid_evaluations(d, grid_points_per_dim, y_grid)
    if evaluations > MAX_GRID_EVALUATIONS:
        raise CapacityError(f"{evaluations} grid evaluations per round exceeds {MAX_GRID_EVALUATIONS}")
    if config.algo == 'nystrom_beforehand':
        raise ConfigError("algo: the adversary cannot feed nystrom_beforehand its inputs in advance")

    spec = KernelSpec(sigma=config.sigma)
    candidates = input_grid(d, grid_points_per_dim)
    labels = np.sort(np.asarray(y_grid, dtype=float))
    forecaster = build_forecaster(config, n, d, radius=float(np.sqrt(d)))

    X = np.zeros((n, d))
    Y = np.zeros(n)
    for t in range(n):
        learner = np.array([forecaster.peek(x) for x in candidates])
        if t == 0:
            comparator = np.zeros(len(candidates))
        else:
            alpha = batch_krr(spec, X[:t], Y[:t], config.lam)
            comparator = krr_predict(spec, X[:t], alpha, candidates)

        objective = ((learner[:, None] - labels[None, :]) ** 2
                     - (comparator[:, None] - labels[None, :]) ** 2)
        i, j = np.unravel_index(int(np.argmax(objective)), objective.shape)
        X[t], Y[t] = candidates[i], labels[j]

        forecaster.step(X[t])
        forecaster.supply_label(Y[t])
        logger.debug(f"round {t + 1}: x={X[t]}, y={Y[t]:+.3f}, objective={objective[i, j]:.4f}")

    logger.info(f"adversarial stream of {n} rounds built with {evaluations} evaluations per round")
    return Dataset(X, Y, f'adversary-{config.algo}-d{d}')
