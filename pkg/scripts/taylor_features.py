#!/usr/bin/env python3
"""
Gaussian Taylor Features
Deterministic tensor-product basis approximating the Gaussian kernel, and its AWV forecaster
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np
from scipy.special import gammaln

from awv_linear import EmbeddedAWV
from forecast_errors import CapacityError, InputError
from kernel_core import KernelSpec, as_points, eval_kernel

logger = logging.getLogger(__name__)

MAX_BASIS_SIZE = 250_000


def basis_size(M: int, d: int) -> int:
    return math.comb(M + d, d)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All ways to write total as an ordered sum of parts nonnegative integers, lexicographically descending"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_indices(M: int, d: int) -> np.ndarray:
    """
    Multi-indices k in N_0^d with |k| <= M, degree-major

    Within one degree, indices follow descending lexicographic order, so for
    M=2, d=2: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
    """
    if M < 0 or d < 1:
        raise InputError(f"need M >= 0 and d >= 1, got M={M}, d={d}")
    size = basis_size(M, d)
    if size > MAX_BASIS_SIZE:
        raise CapacityError(f"C({M}+{d}, {d}) = {size} features exceeds the limit of {MAX_BASIS_SIZE}")

    indices = np.empty((size, d), dtype=np.int64)
    row = 0
    for degree in range(M + 1):
        for index in _compositions(degree, d):
            indices[row] = index
            row += 1
    return indices


@dataclass(frozen=True)
class TaylorBasis:
    """
    G_M = {g_k : |k| <= M} for the Gaussian kernel of bandwidth sigma

    g_k(x) = prod_i psi_{k_i}(x_i),  psi_t(x) = x^t / (sigma^t sqrt(t!)) exp(-x^2 / (2 sigma^2))

    The g_k are orthonormal in the RKHS, so no whitening is applied.
    """

    M: int
    d: int
    sigma: float = 1.0
    indices: np.ndarray = field(init=False, repr=False, compare=False)
    _log_scale: np.ndarray = field(init=False, repr=False, compare=False)
    _odd: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma!r}")
        indices = enumerate_indices(self.M, self.d)
        indices.setflags(write=False)
        degree = indices.sum(axis=1)
        log_scale = -degree * math.log(self.sigma) - 0.5 * gammaln(indices + 1).sum(axis=1)
        object.__setattr__(self, 'indices', indices)
        object.__setattr__(self, '_log_scale', log_scale)
        object.__setattr__(self, '_odd', indices % 2 == 1)

    @property
    def r(self) -> int:
        return self.indices.shape[0]

    def embed(self, x) -> np.ndarray:
        """
        (g_k(x))_k evaluated in log-magnitude with sign tracking

        Exact zeros propagate: a zero coordinate with a positive power gives 0,
        and 0^0 = 1.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.d,):
            raise InputError(f"dimension mismatch: expected d={self.d}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("cannot embed a non-finite input")

        with np.errstate(divide='ignore', invalid='ignore'):
            log_abs = np.log(np.abs(x))
            powers = np.where(self.indices > 0, self.indices * log_abs, 0.0)
        log_magnitude = powers.sum(axis=1) + self._log_scale - (x @ x) / (2.0 * self.sigma ** 2)

        negative_factors = (self._odd & (x < 0)).sum(axis=1)
        sign = np.where(negative_factors % 2 == 1, -1.0, 1.0)
        return sign * np.exp(log_magnitude)

    def embed_many(self, X) -> np.ndarray:
        points = as_points(X, dim=self.d)
        return np.array([self.embed(x) for x in points]).reshape(points.shape[0], self.r)


def embed(basis: TaylorBasis, x) -> np.ndarray:
    return basis.embed(x)


def choose_M(R: float, sigma: float, n: int, lam: float) -> int:
    """M = ceil(8 R^2 / sigma^2  v  2 log(n / (lambda ^ 1)))"""
    if n < 1:
        raise InputError(f"n must be at least 1, got {n!r}")
    if not (sigma > 0 and lam > 0 and R >= 0):
        raise InputError(f"need R >= 0, sigma > 0, lambda > 0 (got R={R}, sigma={sigma}, lambda={lam})")
    return int(math.ceil(max(8.0 * R ** 2 / sigma ** 2, 2.0 * math.log(n / min(lam, 1.0)))))


def truncation_bound(M: int, R: float, sigma: float) -> float:
    """(R / sigma)^(2M + 2) / (M + 1)!, computed in log space"""
    if M < 0:
        raise InputError(f"M must be nonnegative, got {M!r}")
    if R == 0:
        return 0.0
    return float(math.exp((2 * M + 2) * (math.log(R) - math.log(sigma)) - math.lgamma(M + 2)))


def reconstruction_error(basis: TaylorBasis, x, x_prime) -> float:
    """|k(x, x') - sum_{g in G_M} g(x) g(x')|"""
    spec = KernelSpec(sigma=basis.sigma)
    approx = float(basis.embed(x) @ basis.embed(x_prime))
    return abs(eval_kernel(spec, x, x_prime) - approx)


class TaylorKAWV(EmbeddedAWV):
    """PKAWV on the fixed subspace span(G_M): O(r^2) per round with r = C(M+d, d)"""

    name = 'taylor'

    def __init__(self, spec: KernelSpec, lam: float, M: int, d: int, krr: bool = False):
        basis = TaylorBasis(M=M, d=d, sigma=spec.sigma)
        super().__init__(basis.embed, basis.r, lam, dim=d, krr=krr)
        self.basis = basis
        if krr:
            self.name = 'taylor_krr'
        logger.info(f"Taylor basis: M={M}, d={d}, r={basis.r} features")


def main():
    basis = TaylorBasis(M=3, d=1, sigma=1.0)
    x = np.array([0.5])
    print("🧮 Taylor basis M=3, d=1, sigma=1")
    print(f"   r = {basis.r}")
    print(f"   sum g_k(0.5)^2 = {basis.embed(x) @ basis.embed(x):.6f}")
    print(f"   reconstruction error = {reconstruction_error(basis, x, x):.3e}")
    print(f"   truncation bound     = {truncation_bound(3, 0.5, 1.0):.3e}")


if __name__ == "__main__":
    main()
