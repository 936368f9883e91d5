#!/usr/bin/env python3
"""
Cholesky Updates
Rank-one update, hyperbolic downdate and bordered extension of upper-triangular factors
"""

import logging
import math

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from forecast_errors import InputError, NumericError

logger = logging.getLogger(__name__)

JITTER_START = 1e-12
JITTER_RETRIES = 6


def _as_factor(R: np.ndarray, x: np.ndarray):
    R = np.array(R, dtype=float, copy=True)
    x = np.array(x, dtype=float, copy=True).reshape(-1)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] != x.size:
        raise InputError(f"factor of shape {R.shape} cannot take a vector of length {x.size}")
    return R, x


def cholupdate(R: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Upper factor of R^T R + x x^T via Givens rotations

    Works on a padded factor with zero trailing diagonal entries, which is how
    a bordered system is grown. Returns a new array.
    """
    R, x = _as_factor(R, x)
    for k in range(x.size):
        a, b = R[k, k], x[k]
        r = math.hypot(a, b)
        if r == 0.0:
            continue
        c, s = a / r, b / r
        row = R[k, k + 1:].copy()
        R[k, k] = r
        R[k, k + 1:] = c * row + s * x[k + 1:]
        x[k + 1:] = c * x[k + 1:] - s * row
    return R


def choldowndate(R: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Upper factor of R^T R - x x^T via hyperbolic rotations; NumericError if not positive definite"""
    R, x = _as_factor(R, x)
    for k in range(x.size):
        a, b = R[k, k], x[k]
        r_sq = a * a - b * b
        if a <= 0.0 or r_sq <= 0.0:
            raise NumericError(f"downdate loses positive definiteness at pivot {k} (r^2 = {r_sq:.3e})")
        r = math.sqrt(r_sq)
        c, s = r / a, b / a
        R[k, k] = r
        R[k, k + 1:] = (R[k, k + 1:] - s * x[k + 1:]) / c
        x[k + 1:] = c * x[k + 1:] - s * R[k, k + 1:]
    return R


def border_solve(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """s with R^T s = b, the off-diagonal column of a bordered factor"""
    if R.shape[0] == 0:
        return np.zeros(0)
    return solve_triangular(R, b, trans='T', lower=False, check_finite=False)


def cholappend(R: np.ndarray, b: np.ndarray, c: float, s: np.ndarray = None) -> np.ndarray:
    """
    Upper factor of [[R^T R, b], [b^T, c]]

    s may be passed when R^T s = b is already solved.
    """
    m = R.shape[0]
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != m:
        raise InputError(f"border of length {b.size} does not fit an {m}x{m} factor")
    if s is None:
        s = border_solve(R, b)
    corner = c - float(s @ s)
    if not corner > 0.0:
        raise NumericError(f"bordered matrix is not positive definite (Schur complement {corner:.3e})")

    out = np.zeros((m + 1, m + 1))
    out[:m, :m] = R
    out[:m, m] = s
    out[m, m] = math.sqrt(corner)
    return out


def robust_cholesky(A: np.ndarray) -> np.ndarray:
    """Upper Cholesky factor, adding growing diagonal jitter if the plain factorization fails"""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros((0, 0))
    A = 0.5 * (A + A.T)
    try:
        return cholesky(A, lower=False, check_finite=False)
    except LinAlgError:
        pass

    scale = max(float(np.mean(np.abs(np.diag(A)))), 1.0)
    jitter = JITTER_START * scale
    for _ in range(JITTER_RETRIES):
        try:
            R = cholesky(A + jitter * np.eye(A.shape[0]), lower=False, check_finite=False)
            logger.warning(f"Cholesky factorization needed diagonal jitter {jitter:.1e}")
            return R
        except LinAlgError:
            jitter *= 100.0
    raise NumericError(f"matrix of size {A.shape[0]} could not be factorized even with jitter {jitter / 100.0:.1e}")


def solve_normal(R: np.ndarray, c: np.ndarray) -> np.ndarray:
    """(R^T R)^-1 c via two triangular solves"""
    if R.shape[0] == 0:
        return np.zeros(0)
    z = solve_triangular(R, c, trans='T', lower=False, check_finite=False)
    return solve_triangular(R, z, lower=False, check_finite=False)
