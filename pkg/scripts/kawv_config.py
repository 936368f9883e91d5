#!/usr/bin/env python3
"""
Harness Configuration
Presets, environment overrides and validation for every benchmark entry point
"""

import math
import os
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from forecast_errors import ConfigError

load_dotenv('.env.local')

ALGORITHMS = ('exact', 'taylor', 'nystrom', 'nystrom_beforehand', 'fogd')
TASKS = ('regression', 'classification')
FORMATS = ('csv', 'libsvm')

# Experimental protocol: sigma = 1, lambda = 1, KORS with mu = 1, beta = 1, eps = 0.5,
# FOGD with 1000 random features and eta = 1/sqrt(n)
PRESETS: Dict[str, Dict[str, Any]] = {
    'experiments': {
        'lam': 1.0,
        'sigma': 1.0,
        'mu': 1.0,
        'beta': 1.0,
        'eps': 0.5,
        'delta': 0.1,
        'D': 1000,
    },
    'theory': {
        'lam': 1.0,
        'sigma': 1.0,
        'mu': 1.0,
        'beta': None,  # 12 log(n / delta)
        'eps': 0.5,
        'delta': 0.1,
        'D': 1000,
    },
}

# field name -> environment variable
ENV_OVERRIDES = {
    'lam': 'KAWV_LAMBDA',
    'sigma': 'KAWV_SIGMA',
    'mu': 'KAWV_MU',
    'beta': 'KAWV_BETA',
    'eps': 'KAWV_EPS',
    'delta': 'KAWV_DELTA',
    'D': 'KAWV_FEATURES',
    'seed': 'KAWV_SEED',
    'B': 'KAWV_LABEL_BOUND',
    'timeout_s': 'KAWV_TIMEOUT_S',
}

INT_FIELDS = {'D', 'seed', 'timeout_s', 'M', 'limit_n'}


def log_level() -> str:
    return os.getenv('KAWV_LOG_LEVEL', 'INFO').upper()


def results_dir() -> str:
    return os.getenv('KAWV_RESULTS_DIR', './results')


@dataclass
class HarnessConfig:
    """Everything needed to build a forecaster and run it over a dataset"""

    algo: str = 'taylor'
    lam: float = 1.0
    sigma: float = 1.0
    M: Optional[int] = None
    mu: float = 1.0
    beta: Optional[float] = 1.0
    eps: float = 0.5
    delta: float = 0.1
    D: int = 1000
    eta: Optional[float] = None
    seed: int = 0
    B: float = 1.0
    task: str = 'regression'
    limit_n: Optional[int] = None
    timeout_s: Optional[int] = None
    preset: str = 'experiments'
    # drop the f(x_t)^2 penalty: kernel ridge (or projected kernel ridge) on the past only
    krr: bool = False

    @classmethod
    def from_preset(cls, preset: str = 'experiments', **overrides) -> 'HarnessConfig':
        """Preset values, then KAWV_* environment values, then explicit overrides"""
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset '{preset}' (expected one of {sorted(PRESETS)})")

        values: Dict[str, Any] = dict(PRESETS[preset])
        values.update(_environment_values())
        values.update({k: v for k, v in overrides.items() if v is not None})
        values['preset'] = preset

        config = cls(**values)
        config.validate()
        return config

    def with_updates(self, **changes) -> 'HarnessConfig':
        config = replace(self, **changes)
        config.validate()
        return config

    def validate(self) -> None:
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo: '{self.algo}' is not one of {ALGORITHMS}")
        if self.task not in TASKS:
            raise ConfigError(f"task: '{self.task}' is not one of {TASKS}")

        for name in ('lam', 'sigma', 'B'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name}: must be a positive finite number, got {value!r}")

        if self.algo in ('nystrom', 'nystrom_beforehand'):
            if not self.mu > 0:
                raise ConfigError(f"mu: must be positive, got {self.mu!r}")
            if self.beta is not None and not self.beta > 0:
                raise ConfigError(f"beta: must be positive, got {self.beta!r}")
            if not 0 < self.eps < 1:
                raise ConfigError(f"eps: must lie in (0, 1), got {self.eps!r}")
            if not 0 < self.delta < 1:
                raise ConfigError(f"delta: must lie in (0, 1), got {self.delta!r}")

        if self.M is not None and self.M < 0:
            raise ConfigError(f"M: must be a nonnegative integer, got {self.M!r}")
        if self.D < 1:
            raise ConfigError(f"D: must be at least 1, got {self.D!r}")
        if self.eta is not None and not self.eta >= 0:
            raise ConfigError(f"eta: must be nonnegative, got {self.eta!r}")
        if self.limit_n is not None and self.limit_n < 0:
            raise ConfigError(f"limit_n: must be nonnegative, got {self.limit_n!r}")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise ConfigError(f"timeout_s: must be positive, got {self.timeout_s!r}")
        if self.krr and self.algo == 'fogd':
            raise ConfigError("krr: fogd has no kernel ridge variant")

    def as_dict(self) -> Dict[str, Any]:
        return {
            'algo': self.algo,
            'lambda': self.lam,
            'sigma': self.sigma,
            'M': self.M,
            'mu': self.mu,
            'beta': self.beta,
            'eps': self.eps,
            'delta': self.delta,
            'D': self.D,
            'eta': self.eta,
            'seed': self.seed,
            'B': self.B,
            'task': self.task,
            'limit_n': self.limit_n,
            'timeout_s': self.timeout_s,
            'preset': self.preset,
            'krr': self.krr,
        }


def _environment_values() -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for name, variable in ENV_OVERRIDES.items():
        raw = os.getenv(variable)
        if raw is None or raw == '':
            continue
        try:
            values[name] = int(raw) if name in INT_FIELDS else float(raw)
        except ValueError:
            raise ConfigError(f"{variable}: cannot parse '{raw}' as a number")
    return values
