#!/usr/bin/env python3
"""
Rate Tables
Regret exponents n^b as a function of the dictionary budget m = n^a under the capacity condition
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from forecast_errors import InputError

logger = logging.getLogger(__name__)

RATE_CSV_HEADER = ['algorithm', 'gamma', 'a', 'b']

# stream lengths the numeric exponents are fitted over
FIT_N = np.logspace(6, 14, 9)
# exponents s with lambda = n^s (and u with mu = n^u) searched by the numeric minimisers
LAMBDA_EXPONENTS = np.linspace(0.0, 2.0, 401)
MU_EXPONENTS = np.linspace(-1.0, 2.0, 601)


@dataclass(frozen=True)
class RateQuery:
    """Capacity exponent gamma, with d_eff(lambda) <= (n / lambda)^gamma, and budget exponents a"""

    gamma: float
    a_grid: List[float] = field(default_factory=lambda: list(np.linspace(0.0, 1.0, 21)))

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise InputError(f"gamma must lie in (0, 1), got {self.gamma!r}")
        if any(not 0 <= a <= 1 for a in self.a_grid):
            raise InputError("every budget exponent a must lie in [0, 1]")


@dataclass(frozen=True)
class RateRow:
    algorithm: str
    gamma: float
    a: float
    b: float


def optimal_exponent(gamma: float) -> float:
    return gamma / (1.0 + gamma)


def pkawv_threshold(gamma: float) -> float:
    return 2.0 * gamma / (1.0 - gamma ** 2)


def beforehand_threshold(gamma: float) -> float:
    return 2.0 * gamma / (1.0 + gamma)


def pkawv_exponent(gamma: float, a: float) -> float:
    """Online dictionary with mu = n m^(-1/gamma)"""
    if a >= pkawv_threshold(gamma):
        return optimal_exponent(gamma)
    return 1.0 + a * (gamma - 1.0) / (2.0 * gamma)


def beforehand_exponent(gamma: float, a: float) -> float:
    """Dictionary sampled over the whole stream before predicting"""
    if a >= beforehand_threshold(gamma):
        return optimal_exponent(gamma)
    return 1.0 - a / (2.0 * gamma)


def _fit_exponent(log_bounds: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(FIT_N), log_bounds, 1)
    return float(slope)


def sketched_kons_exponent(gamma: float, a: float) -> float:
    """Fitted exponent of min_lambda  lambda + (n / m) d_eff(lambda)"""
    log_bounds = []
    for n in FIT_N:
        lam = n ** LAMBDA_EXPONENTS
        bound = lam + (n / n ** a) * (n / lam) ** gamma
        log_bounds.append(np.log(bound.min()))
    return _fit_exponent(np.array(log_bounds))


def pros_n_kons_floor(gamma: float) -> float:
    """Best exponent reachable when the learner restarts at every dictionary insertion"""
    return 4.0 * gamma / (1.0 + gamma) ** 2


def pros_n_kons_threshold(gamma: float) -> float:
    return 2.0 * gamma * (1.0 - gamma) / (1.0 + gamma) ** 2


def pros_n_kons_exponent(gamma: float, a: float) -> float:
    """Follows the PKAWV line until it meets the restart floor, then stays flat"""
    return max(1.0 + a * (gamma - 1.0) / (2.0 * gamma), pros_n_kons_floor(gamma))


def pros_n_kons_bound_exponent(gamma: float, a: float) -> float:
    """
    Fitted exponent of min_{lambda, mu}  m (lambda + d_eff(lambda)) + n mu / lambda

    with the dictionary size m = max(1, (n / mu)^gamma); the budget m <= n^a
    forces mu >= n^(1 - a / gamma). Matches pros_n_kons_exponent up to
    pros_n_kons_threshold; past it the bound alone leaves out the restart cost.
    """
    s = LAMBDA_EXPONENTS[:, None]
    u = MU_EXPONENTS[None, :]
    within_budget = u >= 1.0 - a / gamma
    log_bounds = []
    for n in FIT_N:
        log_n = np.log(n)
        log_m = np.maximum(gamma * (1.0 - u) * log_n, 0.0)
        terms = np.logaddexp(log_m + s * log_n, log_m + gamma * (1.0 - s) * log_n)
        log_bound = np.logaddexp(terms, (1.0 + u - s) * log_n)
        log_bounds.append(np.where(within_budget, log_bound, np.inf).min())
    return _fit_exponent(np.array(log_bounds))


def emit_rates(query: RateQuery) -> List[RateRow]:
    rows: List[RateRow] = []
    for a in query.a_grid:
        a = float(a)
        rows.append(RateRow('optimal', query.gamma, a, optimal_exponent(query.gamma)))
        rows.append(RateRow('pkawv', query.gamma, a, pkawv_exponent(query.gamma, a)))
        rows.append(RateRow('pkawv_beforehand', query.gamma, a, beforehand_exponent(query.gamma, a)))
        rows.append(RateRow('sketched_kons', query.gamma, a, sketched_kons_exponent(query.gamma, a)))
        rows.append(RateRow('pros_n_kons', query.gamma, a, pros_n_kons_exponent(query.gamma, a)))
    logger.info(f"rates for gamma={query.gamma}: {len(query.a_grid)} budget exponents")
    return rows


def write_rates(rows: List[RateRow], path) -> None:
    frame = pd.DataFrame([(r.algorithm, r.gamma, r.a, r.b) for r in rows], columns=RATE_CSV_HEADER)
    frame.to_csv(path, index=False)
