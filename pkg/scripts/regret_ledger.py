#!/usr/bin/env python3
"""
Regret Ledger
Cumulative regret of a run against batch kernel ridge, checked against the spectral bounds
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from benchmark_runner import RunRecord
from datasets import Dataset
from exact_kawv import batch_krr
from forecast_errors import CapacityError, InputError
from kawv_config import HarnessConfig
from kernel_core import KernelSpec, gram, projection_error, spectral_regret_bound
from taylor_features import TaylorBasis, choose_M

logger = logging.getLogger(__name__)

MAX_DENSE_N = 3000
BOUND_TOLERANCE = 1e-6


@dataclass
class RegretLedger:
    learner_loss: float
    comparator_loss: float
    comparator_norm_sq: float
    regret: float
    bound_prop21: float
    bound_satisfied: bool
    bound_d_eff: float = 0.0
    d_eff: float = 0.0
    bound_projected: Optional[float] = None
    bound_projected_slack: Optional[float] = None
    projection_mu: Optional[float] = None

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def comparator_predictions(spec: KernelSpec, X, Y, lam: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """In-sample predictions K alpha* of batch kernel ridge, with alpha* and K"""
    K = gram(spec, X)
    alpha = batch_krr(spec, X, Y, lam)
    return K @ alpha, alpha, K


def _taylor_bounds(K: np.ndarray, X: np.ndarray, ledger: RegretLedger, lam: float, B: float,
                   sigma: float, M: int, log_det_sum: float) -> None:
    """Deterministic bound for the fixed Taylor subspace, using its measured projection error"""
    n = K.shape[0]
    V = TaylorBasis(M=M, d=X.shape[1], sigma=sigma).embed_many(X)
    mu = projection_error(K, V @ V.T)
    base = lam * ledger.comparator_norm_sq + B ** 2 * log_det_sum
    ledger.projection_mu = mu
    ledger.bound_projected = base + (mu + lam) * n * mu * B ** 2 / lam ** 2
    ledger.bound_projected_slack = lam * ledger.comparator_norm_sq + 1.5 * B ** 2 * log_det_sum


def _nystrom_bound(ledger: RegretLedger, n: int, lam: float, B: float, mu: float,
                   dict_size: int, kappa: float = 1.0) -> None:
    """High-probability bound for leverage-sampled dictionaries of size dict_size"""
    ledger.projection_mu = mu
    ledger.bound_projected = (lam * ledger.comparator_norm_sq
                              + B ** 2 * ledger.d_eff * math.log(math.e + math.e * n * kappa ** 2 / lam)
                              + 2.0 * B ** 2 * (dict_size + 1) * n * mu / lam)


def regret_report(records: List[RunRecord], dataset: Dataset, lam: float, B: float,
                  config: Optional[HarnessConfig] = None) -> RegretLedger:
    """
    Regret of the recorded predictions against f* = batch kernel ridge with the same lambda

    Only the first len(records) examples enter the comparator, so truncated
    runs are compared fairly.
    """
    n = len(records)
    if n > MAX_DENSE_N:
        raise CapacityError(f"regret needs a dense {n}x{n} solve; at most {MAX_DENSE_N} steps are supported")
    if n > dataset.n:
        raise InputError(f"{n} records but only {dataset.n} examples")

    X, Y = dataset.X[:n], dataset.y[:n]
    recorded_y = np.array([r.y for r in records])
    if n and not np.allclose(recorded_y, Y, rtol=0, atol=1e-12):
        raise InputError("records do not match the dataset labels")

    sigma = config.sigma if config is not None else 1.0
    spec = KernelSpec(sigma=sigma)
    learner_loss = float(sum(r.loss for r in records))

    if n == 0:
        return RegretLedger(0.0, 0.0, 0.0, 0.0, 0.0, True)

    predictions, alpha, K = comparator_predictions(spec, X, Y, lam)
    comparator_loss = float(np.sum((predictions - Y) ** 2))
    norm_sq = float(alpha @ K @ alpha)
    bounds = spectral_regret_bound(K, lam, B, norm_sq, kappa=spec.kappa)

    regret = learner_loss - comparator_loss
    ledger = RegretLedger(
        learner_loss=learner_loss,
        comparator_loss=comparator_loss,
        comparator_norm_sq=norm_sq,
        regret=regret,
        bound_prop21=bounds.log_det_bound,
        bound_satisfied=regret <= bounds.log_det_bound + BOUND_TOLERANCE,
        bound_d_eff=bounds.d_eff_bound,
        d_eff=bounds.d_eff,
    )

    if config is not None and config.algo == 'taylor':
        M = config.M if config.M is not None else choose_M(dataset.head(n).radius(), sigma, n, lam)
        _taylor_bounds(K, X, ledger, lam, B, sigma, M, bounds.log_det_sum)
    elif config is not None and config.algo in ('nystrom', 'nystrom_beforehand'):
        _nystrom_bound(ledger, n, lam, B, config.mu, records[-1].dict_size, spec.kappa)

    logger.info(f"regret {regret:.4f} vs bound {bounds.log_det_bound:.4f} "
                f"({'satisfied' if ledger.bound_satisfied else 'VIOLATED'})")
    return ledger
