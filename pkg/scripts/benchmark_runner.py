#!/usr/bin/env python3
"""
Benchmark Runner
One-pass evaluation of a forecaster over a dataset, with per-step records and timing
"""

import logging
import math
import os
import re
import time
from dataclasses import astuple, dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import stats

from datasets import Dataset
from exact_kawv import ExactKAWV
from fogd_baseline import FogdConfig, FogdForecaster
from forecast_errors import ConfigError, InputError, ParseError, ProtocolError
from kawv_config import HarnessConfig
from kernel_core import KernelSpec
from nystrom_kors import KorsConfig, NystromKAWV
from online_protocol import OnlineForecaster
from taylor_features import TaylorKAWV, choose_M

logger = logging.getLogger(__name__)

RUN_CSV_HEADER = ['t', 'y', 'yhat', 'loss', 'cum_loss', 'elapsed_ns', 'dict_size']


@dataclass(frozen=True)
class RunRecord:
    t: int
    y: float
    yhat: float
    loss: float
    cum_loss: float
    elapsed_ns: int
    dict_size: int


@dataclass(frozen=True)
class SlopeEstimate:
    """Least-squares slope of step time against t, with its 95% confidence interval"""

    slope: float
    low: float
    high: float
    intercept: float

    @property
    def contains_zero(self) -> bool:
        return self.low <= 0.0 <= self.high


def build_forecaster(config: HarnessConfig, n: int, d: int, radius: float = 1.0,
                     inputs: Optional[np.ndarray] = None) -> OnlineForecaster:
    """Forecaster named by config.algo, sized for a stream of n inputs in R^d"""
    spec = KernelSpec(sigma=config.sigma)

    if config.algo == 'exact':
        return ExactKAWV(spec, config.lam, dim=d, krr=config.krr)

    if config.algo == 'taylor':
        M = config.M if config.M is not None else choose_M(radius, config.sigma, max(n, 1), config.lam)
        return TaylorKAWV(spec, config.lam, M, d, krr=config.krr)

    kors = KorsConfig(mu=config.mu, beta=config.beta, eps=config.eps, delta=config.delta,
                      seed=config.seed)
    if config.algo == 'nystrom':
        return NystromKAWV(spec, config.lam, kors, n=n, dim=d, krr=config.krr)
    if config.algo == 'nystrom_beforehand':
        if inputs is None:
            raise ConfigError("algo: nystrom_beforehand needs every input before the stream starts")
        return NystromKAWV.beforehand(spec, config.lam, inputs, kors, n=n, krr=config.krr)

    if config.algo == 'fogd':
        fogd = FogdConfig(D=config.D, eta=config.eta, sigma=config.sigma, seed=config.seed)
        return FogdForecaster(fogd, d, n=n)

    raise ConfigError(f"algo: unknown forecaster '{config.algo}'")


def run_stream(config: HarnessConfig, dataset: Dataset,
               forecaster: Optional[OnlineForecaster] = None) -> List[RunRecord]:
    """
    Feed the dataset through the forecaster in order

    Each round emits y_hat_t from x_t alone, then reveals y_t. Stops early
    after limit_n rounds or once timeout_s seconds of wall time have passed.
    """
    data = dataset.head(config.limit_n)
    if data.n == 0:
        return []

    if forecaster is None:
        forecaster = build_forecaster(config, data.n, data.d, data.radius(), data.X)

    deadline = None
    if config.timeout_s:
        deadline = time.perf_counter_ns() + int(config.timeout_s * 1e9)

    records: List[RunRecord] = []
    cum_loss = 0.0
    for t in range(1, data.n + 1):
        x, y = data.X[t - 1], float(data.y[t - 1])
        start = time.perf_counter_ns()
        try:
            yhat = forecaster.step(x)
            forecaster.supply_label(y)
        except ProtocolError as e:
            raise ProtocolError(f"step {t}: {e}")
        elapsed = time.perf_counter_ns() - start

        loss = (yhat - y) ** 2
        cum_loss += loss
        records.append(RunRecord(t, y, yhat, loss, cum_loss, elapsed, forecaster.dict_size))

        if deadline is not None and time.perf_counter_ns() > deadline:
            logger.warning(f"{config.algo}: timeout of {config.timeout_s}s reached after {t} of {data.n} steps")
            break

    logger.info(f"{config.algo}: {len(records)} steps, cumulative loss {cum_loss:.4f}")
    return records


def classification_error(records: List[RunRecord]) -> float:
    """Fraction of rounds with sign(y_hat) != y, where sign(0) = +1"""
    if not records:
        return 0.0
    yhat = np.array([r.yhat for r in records])
    y = np.array([r.y for r in records])
    return float(np.mean(np.where(yhat >= 0, 1.0, -1.0) != y))


def summarize_run(records: List[RunRecord], task: str = 'regression') -> Dict[str, Any]:
    """Average loss, optional classification error, and throughput excluding the first step"""
    summary: Dict[str, Any] = {
        'n': len(records),
        'cum_loss': records[-1].cum_loss if records else 0.0,
        'average_loss': records[-1].cum_loss / len(records) if records else 0.0,
        'final_dict_size': records[-1].dict_size if records else 0,
    }
    if task == 'classification':
        summary['classification_error'] = classification_error(records)

    steady = [r.elapsed_ns for r in records[1:]]
    if steady:
        total_ns = sum(steady)
        summary['mean_step_ns'] = total_ns / len(steady)
        summary['steps_per_second'] = len(steady) / (total_ns / 1e9) if total_ns else math.inf
    return summary


def write_records(records: List[RunRecord], path) -> None:
    """CSV with header t,y,yhat,loss,cum_loss,elapsed_ns,dict_size"""
    frame = pd.DataFrame([astuple(r) for r in records], columns=RUN_CSV_HEADER)
    frame.to_csv(path, index=False)


def read_records(path) -> List[RunRecord]:
    if not os.path.isfile(path):
        raise InputError(f"records file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except pd.errors.EmptyDataError:
        raise ParseError(str(path), 1, f"expected header {','.join(RUN_CSV_HEADER)}")
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise ParseError(str(path), int(match.group(1)) if match else 0, str(e))
    if list(frame.columns) != RUN_CSV_HEADER:
        raise InputError(f"{path}: expected header {','.join(RUN_CSV_HEADER)}, got {','.join(map(str, frame.columns))}")
    numeric = frame.apply(pd.to_numeric, errors='coerce')
    bad_rows = np.flatnonzero(numeric.isna().any(axis=1).to_numpy())
    if len(bad_rows):
        row = int(bad_rows[0])
        raise ParseError(str(path), row + 2, f"non-numeric or missing value in {list(frame.iloc[row])}")
    frame = numeric
    return [
        RunRecord(int(row.t), float(row.y), float(row.yhat), float(row.loss), float(row.cum_loss),
                  int(row.elapsed_ns), int(row.dict_size))
        for row in frame.itertuples(index=False)
    ]


def step_time_profile(forecaster: OnlineForecaster, X, y) -> np.ndarray:
    """Wall time in ns of every step + label round"""
    times = np.empty(len(y), dtype=np.int64)
    for t, (x, label) in enumerate(zip(X, y)):
        start = time.perf_counter_ns()
        forecaster.step(x)
        forecaster.supply_label(label)
        times[t] = time.perf_counter_ns() - start
    return times


def time_slope(times, skip_first: bool = True) -> SlopeEstimate:
    times = np.asarray(times, dtype=float)
    if skip_first:
        times = times[1:]
    if times.size < 3:
        raise InputError(f"need at least 3 timings for a slope, got {times.size}")
    steps = np.arange(1, times.size + 1, dtype=float)
    fit = stats.linregress(steps, times)
    half_width = stats.t.ppf(0.975, times.size - 2) * fit.stderr
    return SlopeEstimate(slope=fit.slope, low=fit.slope - half_width, high=fit.slope + half_width,
                         intercept=fit.intercept)
