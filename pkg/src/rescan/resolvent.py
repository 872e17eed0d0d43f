"""Smallest singular values and the resolvent-norm threshold test."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConfigError, NonFiniteEntry

#: Above this size sigma_min switches from a full SVD to inverse iteration.
DENSE_LIMIT = 2000
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class ThresholdRule:
    """Resolvent-norm cutoff as a function of the resolution n.

    ``practical``: a fixed cutoff C.  ``theoretical``: a_n = n^(-1/d) and
    C_n = 1/(2 sqrt(a_n)).
    """

    mode: str = "practical"
    cutoff: float = 200.0
    d: int = 1

    def __post_init__(self):
        if self.mode not in ("practical", "theoretical"):
            raise ConfigError(f"unknown threshold mode {self.mode!r}")
        if self.mode == "practical" and not self.cutoff > 0:
            raise ConfigError("cutoff C must be positive")

    @classmethod
    def theoretical(cls, d: int = 1):
        return cls(mode="theoretical", cutoff=math.nan, d=d)

    def rate(self, n: int) -> float:
        return float(n) ** (-1.0 / self.d)

    def cutoff_at(self, n: int) -> float:
        if self.mode == "practical":
            return float(self.cutoff)
        return 1.0 / (2.0 * math.sqrt(self.rate(n)))

    def spacing_at(self, n: int) -> float:
        """Lattice spacing exp(-1/a_n) of the theoretical schedule."""
        return math.exp(-1.0 / self.rate(n))


def _check(A):
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ConfigError(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteEntry("matrix has non-finite entries")
    return A


def _sigma_min_iterative(A, tol=1e-12, maxiter=500):
    """Inverse iteration on A^H A using one LU factorisation of A."""
    lu = linalg.lu_factor(A, check_finite=False)
    if np.any(np.diag(lu[0]) == 0):
        return 0.0
    rng = np.random.default_rng(0)
    x = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    sigma = math.inf
    for _ in range(maxiter):
        y = linalg.lu_solve(lu, x, trans=2, check_finite=False)   # A^H y = x
        y = linalg.lu_solve(lu, y, check_finite=False)            # A y' = y
        nrm = np.linalg.norm(y)
        if nrm == 0 or not math.isfinite(nrm):
            return 0.0
        new = 1.0 / math.sqrt(nrm)
        x = y / nrm
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    # Rayleigh quotient refinement
    return float(min(sigma, np.linalg.norm(A @ x)))


def sigma_min(A) -> float:
    """Smallest singular value of a square matrix."""
    A = _check(A)
    if A.ndim != 2:
        raise ConfigError("sigma_min takes one matrix; use sigma_min_batch for stacks")
    if A.shape[0] == 0:
        raise ConfigError("empty matrix")
    if A.shape[0] <= DENSE_LIMIT:
        return float(np.linalg.svd(A, compute_uv=False)[-1])
    return _sigma_min_iterative(A)


def sigma_min_batch(stack) -> np.ndarray:
    """sigma_min over a stack of shape (k, N, N)."""
    stack = _check(stack)
    if stack.shape[-1] <= DENSE_LIMIT:
        return np.linalg.svd(stack, compute_uv=False)[..., -1]
    return np.array([_sigma_min_iterative(a) for a in stack])


def resolvent_norm(A) -> float:
    """1 / sigma_min(A); ``math.inf`` when sigma_min underflows."""
    s = sigma_min(A)
    return math.inf if s < UNDERFLOW else 1.0 / s


def inverse_norm_of_identity_plus(K) -> float:
    K = np.asarray(K)
    return resolvent_norm(np.eye(K.shape[0]) + K)


def threshold_test(K_n, rule: ThresholdRule):
    """(flag, sigma): flag is sigma_min(I + K_n) <= 1/C at the grid's resolution."""
    entries = K_n.entries
    sigma = sigma_min(np.eye(entries.shape[0]) + entries)
    return sigma <= 1.0 / rule.cutoff_at(K_n.grid.n), sigma
