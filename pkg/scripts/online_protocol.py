#!/usr/bin/env python3
"""
Online Protocol
Base class enforcing the receive-input / predict / receive-label alternation
"""

import copy
import math
from typing import Optional

import numpy as np

from forecast_errors import InputError, ProtocolError


class OnlineForecaster:
    """
    Streaming forecaster driven one round at a time

    Subclasses implement _step (prediction plus any state update that must
    happen before the label is known) and _supply_label. The base class owns
    the protocol state machine and input validation.
    """

    name = 'base'

    def __init__(self, dim: Optional[int] = None):
        self.dim = dim
        self.t = 0
        self._pending: Optional[np.ndarray] = None

    @property
    def awaiting_label(self) -> bool:
        return self._pending is not None

    @property
    def dict_size(self) -> int:
        return 0

    def step(self, x) -> float:
        """Receive x_t and return the prediction for y_t"""
        if self._pending is not None:
            raise ProtocolError(
                f"step {self.t + 1} requested before the label of step {self.t} was supplied"
            )
        point = self._check_input(x)
        prediction = float(self._step(point))
        self._pending = point
        self.t += 1
        return prediction

    def supply_label(self, y: float) -> None:
        """Reveal y_t for the pending step"""
        if self._pending is None:
            raise ProtocolError(f"label supplied with no pending prediction (after step {self.t})")
        y = float(y)
        if not math.isfinite(y):
            raise InputError(f"label for step {self.t} is not finite")
        self._supply_label(self._pending, y)
        self._pending = None

    def peek(self, x) -> float:
        """Prediction the forecaster would make for x, without changing its state"""
        if self._pending is not None:
            raise ProtocolError("cannot peek while a label is pending")
        trial = copy.deepcopy(self)
        return trial.step(x)

    def _check_input(self, x) -> np.ndarray:
        point = np.atleast_1d(np.asarray(x, dtype=float))
        if point.ndim != 1 or point.size == 0:
            raise InputError(f"expected a nonempty input vector, got shape {point.shape}")
        if self.dim is None:
            self.dim = point.size
        elif point.size != self.dim:
            raise InputError(f"dimension mismatch: expected d={self.dim}, got d={point.size}")
        if not np.all(np.isfinite(point)):
            raise InputError(f"input at step {self.t + 1} contains non-finite values")
        return point

    def _step(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def _supply_label(self, x: np.ndarray, y: float) -> None:
        raise NotImplementedError
