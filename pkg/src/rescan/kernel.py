"""Matrix discretisation of K(z) = q (-Δ - z²)^{-1} χ on a cell grid.

Q_M is tiled by the cells S_i = [0, 1/n)^d + i whose corners i run over
-M/2 + (1/n) Z^d.  In the orthonormal basis e_i = n^{d/2} χ_{S_i} the
node-sampled operator has entries

    (K_n)_ij = n^{-d} q(i) G(|i - j|, z)

(with a zero diagonal for d >= 2, where G is singular), while the compression
P_n K P_n has entries n^{-d} <K>_ij with <K>_ij the mean of
K(x, y) = q(x) G(|x - y|, z) over S_i x S_j.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GridMismatch, NonFiniteEntry
from .greens import SheetPoint, as_sheet_point, check_sheet, green_array
from .potential import Potential, SupportBox

ALIGN_TOL = 1e-9


def cells_per_side(support: SupportBox, n: int) -> int:
    """Number of cells along one axis; requires n M to be an integer."""
    L = n * support.M
    Li = int(round(L))
    if Li < 1 or abs(L - Li) > ALIGN_TOL * max(1.0, L):
        raise ConfigError(f"n*M = {L} must be a positive integer (n={n}, M={support.M})")
    return Li


def aligned_resolution(n: int, M: float, max_factor: int = 1000) -> int:
    """Smallest integer n' >= n for which n' M is an integer."""
    for cand in range(int(n), int(n) * max_factor + 1):
        L = cand * M
        if abs(L - round(L)) <= ALIGN_TOL * max(1.0, L):
            return cand
    raise ConfigError(f"no resolution n >= {n} makes n*M integral for M={M}")


@dataclass(frozen=True, eq=False)
class DiscretizationGrid:
    n: int
    support: SupportBox
    index: np.ndarray = field(repr=False)   # (N, d) integer cell offsets, lexicographic

    @property
    def d(self) -> int:
        return self.support.d

    @property
    def N(self) -> int:
        return self.index.shape[0]

    @property
    def side(self) -> int:
        return int(round(self.n * self.support.M))

    @property
    def nodes(self) -> np.ndarray:
        """Cell corners i, shape (N, d)."""
        return -self.support.half + self.index / self.n


def build_grid(support: SupportBox, n: int) -> DiscretizationGrid:
    if int(n) != n or n < 1:
        raise ConfigError(f"resolution n must be a positive integer, got {n}")
    n = int(n)
    L = cells_per_side(support, n)
    index = np.array(list(itertools.product(range(L), repeat=support.d)), dtype=np.int64)
    index.setflags(write=False)
    return DiscretizationGrid(n, support, index)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    grid: DiscretizationGrid
    z: SheetPoint
    entries: np.ndarray = field(repr=False)


class KernelAssembler:
    """Reusable assembly of K_n(z) for one potential and grid.

    The lattice structure means G only has to be evaluated on the distinct
    squared integer distances between nodes; the matrix is then a gather.
    """

    def __init__(self, qvals, grid: DiscretizationGrid):
        self.grid = grid
        self.d = grid.d
        self.n = grid.n
        self.qvals = np.asarray(qvals, dtype=complex)
        if self.qvals.shape != (grid.N,):
            raise ConfigError("potential samples do not match the grid")
        diff = grid.index[:, None, :] - grid.index[None, :, :]
        sq = np.sum(diff * diff, axis=-1)
        self.unique_sq, inverse = np.unique(sq, return_inverse=True)
        self.gather = inverse.reshape(sq.shape)
        self.radii = np.sqrt(self.unique_sq) / self.n
        self.scale = self.qvals * self.n ** (-self.d)

    @classmethod
    def for_potential(cls, p: Potential, grid: DiscretizationGrid):
        return cls(p(grid.nodes), grid)

    def kernel_values(self, z: SheetPoint) -> np.ndarray:
        g = np.zeros(len(self.radii), dtype=complex)
        if self.d == 1:
            g[:] = green_array(1, self.radii, z)
        else:
            # unique_sq[0] == 0 is the diagonal, left at zero
            g[1:] = green_array(self.d, self.radii[1:], z)
        return g

    def matrix(self, z) -> np.ndarray:
        z = as_sheet_point(z)
        check_sheet(self.d, z.sheet)
        K = self.scale[:, None] * self.kernel_values(z)[self.gather]
        if not np.all(np.isfinite(K)):
            raise NonFiniteEntry(f"non-finite kernel entry at z={z.value} (sheet {z.sheet})")
        return K


def build_kernel_matrix(p: Potential, grid: DiscretizationGrid, z) -> KernelMatrix:
    z = as_sheet_point(z)
    K = KernelAssembler.for_potential(p, grid).matrix(z)
    K.setflags(write=False)
    return KernelMatrix(grid, z, K)


def _gauss01(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def build_averaged_matrix(p: Potential, grid: DiscretizationGrid, z, quad_order: int = 16) -> np.ndarray:
    """n^{-d} <K>_ij by tensor Gauss-Legendre quadrature on every cell pair.

    By translation invariance of G, the inner mean over S_j only depends on the
    offset j - i and on the outer quadrature node, so it is tabulated once per
    offset.  In d = 1 the diagonal cell is split at x = y, where G has a kink;
    for d >= 2 the diagonal block is set to zero like the sampled matrix.
    """
    z = as_sheet_point(z)
    d, n, L = grid.d, grid.n, grid.side
    check_sheet(d, z.sheet)
    h = 1.0 / n
    u, w = _gauss01(quad_order)
    U = np.array(list(itertools.product(u, repeat=d)))           # (Q^d, d)
    W = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)

    offsets = np.array(list(itertools.product(range(-(L - 1), L), repeat=d)), dtype=float)
    # table[o, a] = mean over v of G(h |m_o + v - u_a|)
    table = np.zeros((len(offsets), len(U)), dtype=complex)
    chunk = max(1, 2_000_000 // (len(U) * len(U)))
    for start in range(0, len(offsets), chunk):
        m = offsets[start:start + chunk]
        vec = m[:, None, None, :] + U[None, None, :, :] - U[None, :, None, :]   # (o, a, b, d)
        r = h * np.sqrt(np.sum(vec * vec, axis=-1))
        if d == 1:
            zero = np.all(m == 0, axis=-1)
            vals = green_array(1, r, z)
            table[start:start + chunk] = vals @ W
            if np.any(zero):
                table[start:start + chunk][zero] = _diag_cell_mean_1d(u, w, h, z)
        else:
            zero = np.all(m == 0, axis=-1)
            rr = np.where(zero[:, None, None], 1.0, r)
            vals = green_array(d, rr, z) @ W
            vals[zero] = 0.0
            table[start:start + chunk] = vals

    X = grid.nodes[:, None, :] + h * U[None, :, :]                    # (N, Q^d, d)
    qx = p(X.reshape(-1, d)).reshape(len(grid.index), len(U))         # (N, Q^d)
    idx = grid.index
    off = idx[None, :, :] - idx[:, None, :] + (L - 1)                 # j - i shifted
    flat = np.ravel_multi_index(tuple(off[..., k] for k in range(d)), (2 * L - 1,) * d)
    A = np.einsum("ia,ija->ij", qx * W[None, :], table[flat])
    A *= n ** (-d)
    if not np.all(np.isfinite(A)):
        raise NonFiniteEntry(f"non-finite averaged entry at z={z.value}")
    return A


def _diag_cell_mean_1d(u, w, h, z):
    """mean_v G(h |v - u_a|) over v in [0, 1], split at v = u_a."""
    out = np.empty(len(u), dtype=complex)
    for a, ua in enumerate(u):
        left = ua * u                    # v in [0, ua]
        right = ua + (1 - ua) * u        # v in [ua, 1]
        gl = green_array(1, h * np.abs(left - ua), z)
        gr = green_array(1, h * np.abs(right - ua), z)
        out[a] = ua * (gl @ w) + (1 - ua) * (gr @ w)
    return out


def project_piecewise_constant(values, fine_n: int, grid: DiscretizationGrid) -> np.ndarray:
    """Cell means of f from its samples at the centres of a finer cell grid.

    ``values`` has shape ``(fine_n M,) * d`` (or is flat in lexicographic
    order); ``fine_n`` must be a multiple of ``grid.n``.
    """
    if fine_n % grid.n:
        raise GridMismatch(f"fine resolution {fine_n} does not refine n={grid.n}")
    r = fine_n // grid.n
    L = grid.side
    values = np.asarray(values)
    fine_shape = (L * r,) * grid.d
    if values.size != math.prod(fine_shape):
        raise GridMismatch(f"expected {math.prod(fine_shape)} fine samples, got {values.size}")
    v = values.reshape(fine_shape)
    split = []
    for _ in range(grid.d):
        split += [L, r]
    blocks = v.reshape(split)
    means = blocks.mean(axis=tuple(range(1, 2 * grid.d, 2)))
    return means.reshape(-1)


def embed_coarse(K_coarse: np.ndarray, grid: DiscretizationGrid, factor: int = 2) -> np.ndarray:
    """Matrix of K_n P_n in the basis of the grid refined ``factor`` times."""
    d, L = grid.d, grid.side
    fine = np.array(list(itertools.product(range(L * factor), repeat=d)))
    coarse_of_fine = np.ravel_multi_index(tuple((fine // factor).T), (L,) * d)
    E = np.zeros((len(fine), grid.N))
    E[np.arange(len(fine)), coarse_of_fine] = factor ** (-d / 2)
    return E @ K_coarse @ E.T
