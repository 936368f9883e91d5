#!/usr/bin/env python3
"""
Datasets
CSV and libsvm ingestion, [-1, 1] scaling and the synthetic smooth regression target
"""

import logging
import os
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd
from sklearn.datasets import load_svmlight_file

from forecast_errors import InputError, ParseError

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """Ordered stream of inputs X (n x d) and labels y (n)"""

    X: np.ndarray
    y: np.ndarray
    name: str = 'dataset'

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise InputError(f"{self.name}: {self.X.shape} inputs do not match {self.y.size} labels")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def head(self, limit: Optional[int]) -> 'Dataset':
        if limit is None or limit >= self.n:
            return self
        return Dataset(self.X[:limit], self.y[:limit], self.name)

    def radius(self) -> float:
        """max_t ||x_t||"""
        if self.n == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.X, axis=1)))


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except (TypeError, ValueError):
        return False


def _read_csv(path: str, label_column: Optional[Union[str, int]]) -> Dataset:
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False,
                            skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return Dataset(np.zeros((0, 0)), np.zeros(0), os.path.basename(path))
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise ParseError(path, int(match.group(1)) if match else 0, str(e))

    first_line = 1
    header = None
    if len(frame):
        numeric = [_is_number(v) for v in frame.iloc[0] if isinstance(v, str)]
        if numeric and not any(numeric):
            header = [str(v).strip() for v in frame.iloc[0]]
            frame = frame.iloc[1:]
            first_line = 2
        elif not all(numeric):
            raise ParseError(path, 1, f"mixed numeric and text fields in {list(frame.iloc[0])}")

    # trailing blank lines
    while len(frame) and frame.iloc[-1].isna().all():
        frame = frame.iloc[:-1]

    values = frame.apply(pd.to_numeric, errors='coerce').to_numpy(dtype=float)
    bad_rows = np.flatnonzero(~np.all(np.isfinite(values), axis=1)) if values.size else []
    if len(bad_rows):
        row = int(bad_rows[0])
        raise ParseError(path, first_line + row, f"non-numeric or missing value in {list(frame.iloc[row])}")

    n_columns = values.shape[1] if values.ndim == 2 else 0
    if label_column is None:
        label_index = n_columns - 1
    elif isinstance(label_column, int) or str(label_column).lstrip('-').isdigit():
        label_index = int(label_column) % max(n_columns, 1)
    elif header is not None and label_column in header:
        label_index = header.index(label_column)
    else:
        raise InputError(f"{path}: label column '{label_column}' not found")

    X = np.delete(values, label_index, axis=1)
    y = values[:, label_index]
    return Dataset(X, y, os.path.basename(path))


def _first_bad_libsvm_line(path: str) -> int:
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            tokens = line.split('#', 1)[0].split()
            if not tokens:
                continue
            if not _is_number(tokens[0]):
                return number
            for token in tokens[1:]:
                index, _, value = token.partition(':')
                if not (index.isdigit() and int(index) >= 1 and _is_number(value)):
                    return number
    return 0


def _read_libsvm(path: str) -> Dataset:
    with open(path) as f:
        if not any(line.split('#', 1)[0].strip() for line in f):
            return Dataset(np.zeros((0, 0)), np.zeros(0), os.path.basename(path))
    bad_line = _first_bad_libsvm_line(path)
    if bad_line:
        raise ParseError(path, bad_line, "expected '<label> <index>:<value> ...' with 1-based indices")
    try:
        X, y = load_svmlight_file(path, zero_based=False)
    except (ValueError, TypeError) as e:
        raise ParseError(path, 0, str(e))
    return Dataset(X.toarray(), y, os.path.basename(path))


def ingest(path: str, fmt: str = 'csv', label_column: Optional[Union[str, int]] = None) -> Dataset:
    """Load a dataset preserving file order; the label is the last CSV column unless named"""
    if not os.path.isfile(path):
        raise InputError(f"data file not found: {path}")
    if fmt == 'csv':
        dataset = _read_csv(path, label_column)
    elif fmt == 'libsvm':
        dataset = _read_libsvm(path)
    else:
        raise InputError(f"unknown data format '{fmt}'")
    logger.info(f"Loaded {dataset.n} examples with d={dataset.d} from {path}")
    return dataset


def _scale_columns(values: np.ndarray) -> np.ndarray:
    low = values.min(axis=0)
    high = values.max(axis=0)
    span = high - low
    constant = span == 0
    scaled = 2.0 * (values - low) / np.where(constant, 1.0, span) - 1.0
    scaled[..., constant] = 0.0
    return scaled


def scale(dataset: Dataset) -> Dataset:
    """Per-coordinate affine map onto [-1, 1]; constant coordinates map to 0"""
    if dataset.n == 0:
        return dataset
    X = _scale_columns(dataset.X) if dataset.d else dataset.X
    y = _scale_columns(dataset.y.reshape(-1, 1))[:, 0]
    return Dataset(X, y, dataset.name)


def to_classification(dataset: Dataset) -> Dataset:
    """Labels mapped to {-1, +1} by sign, with sign(0) = +1"""
    return Dataset(dataset.X, np.where(dataset.y >= 0, 1.0, -1.0), dataset.name)


def synthetic_regression(n: int, d: int, seed: int = 0, frequency: float = 1.0,
                         noise: float = 0.1) -> Dataset:
    """x uniform on [-1, 1]^d, y = clip(sin(frequency * sum(x)) + noise * N(0, 1), -1, 1)"""
    if n < 0 or d < 1:
        raise InputError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    y = np.clip(np.sin(frequency * X.sum(axis=1)) + noise * rng.standard_normal(n), -1.0, 1.0)
    return Dataset(X, y, f'synthetic-d{d}-seed{seed}')


def write_dataset(dataset: Dataset, path: str) -> None:
    columns = [f'x{i + 1}' for i in range(dataset.d)]
    frame = pd.DataFrame(dataset.X, columns=columns)
    frame['y'] = dataset.y
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {dataset.n} examples to {path}")
