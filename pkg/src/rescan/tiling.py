"""Spectral-parameter lattices and tilings of the plane / logarithmic cover."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

log = logging.getLogger(__name__)

SNAP = 1e-9


@dataclass(frozen=True)
class Box:
    """Closed rectangle [re_min, re_max] x [im_min, im_max]."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise ConfigError(f"degenerate box {self}")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return ((z.real >= self.re_min) & (z.real <= self.re_max)
                & (z.imag >= self.im_min) & (z.imag <= self.im_max))

    def as_tuple(self):
        return (self.re_min, self.re_max, self.im_min, self.im_max)


@dataclass(frozen=True)
class Tile:
    index: int       # j >= 1, position in the spiral
    sheet: int       # k >= 1, Riemann sheet counted from 1
    box: Box


@dataclass(frozen=True)
class LatticeSpec:
    box: Box
    spacing: float
    sheet: int = 0
    exclusion: float | None = None   # None: one lattice spacing

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigError("lattice spacing must be positive")

    @property
    def exclusion_radius(self) -> float:
        return self.spacing if self.exclusion is None else float(self.exclusion)


def lattice_indices(spec: LatticeSpec):
    """Integer coordinates (a, b) of the points h(a + ib) inside the box, row-major."""
    h = spec.spacing
    b = spec.box
    a0 = math.ceil(b.re_min / h - SNAP)
    a1 = math.floor(b.re_max / h + SNAP)
    b0 = math.ceil(b.im_min / h - SNAP)
    b1 = math.floor(b.im_max / h + SNAP)
    if a1 < a0 or b1 < b0:
        return np.zeros((0, 2), dtype=np.int64)
    A, B = np.meshgrid(np.arange(a0, a1 + 1), np.arange(b0, b1 + 1))
    ij = np.stack([A.ravel(), B.ravel()], axis=1).astype(np.int64)
    z = h * ij[:, 0] + 1j * h * ij[:, 1]
    keep = np.abs(z) >= spec.exclusion_radius
    return ij[keep]


def lattice_points(spec: LatticeSpec) -> np.ndarray:
    """Points of h(Z + iZ) in the closed box, outside the disc |z| < exclusion.

    Ordered by increasing imaginary part, then increasing real part.  An empty
    result is logged, not raised.
    """
    ij = lattice_indices(spec)
    if len(ij) == 0:
        log.warning("empty lattice for %s", spec)
    return spec.spacing * ij[:, 0] + 1j * spec.spacing * ij[:, 1]


def spiral_centers(count: int):
    """Centres of the counter-clockwise square spiral starting at -i/2.

    Legs go down, right, up, left with lengths 1, 1, 2, 2, 3, 3, ...
    """
    if count < 1:
        raise ConfigError("tile count must be >= 1")
    centers = [complex(0.0, -0.5)]
    moves = (-1j, 1, 1j, -1)
    c = centers[0]
    leg = 1
    k = 0
    while len(centers) < count:
        for _ in range(2):
            step = moves[k % 4]
            for _ in range(leg):
                c = c + step
                centers.append(c)
                if len(centers) == count:
                    return centers
            k += 1
        leg += 1
    return centers


def _unit_box(c: complex) -> Box:
    return Box(c.real - 0.5, c.real + 0.5, c.imag - 0.5, c.imag + 0.5)


def spiral_tiles(count: int) -> list[Tile]:
    return [Tile(j + 1, 1, _unit_box(c)) for j, c in enumerate(spiral_centers(count))]


def sheet_tiles(n: int) -> list[Tile]:
    """Tiles B_j^(k), k = 1..n, j = 1..n-k+1, grouped by sheet."""
    if n < 1:
        raise ConfigError("sheet depth must be >= 1")
    spiral = spiral_tiles(n)
    return [Tile(j, k, spiral[j - 1].box) for k in range(1, n + 1) for j in range(1, n - k + 2)]


def sheet_index(k: int) -> int:
    """Map tile sheet k = 1, 2, 3, 4, 5, ... to log-sheet 0, +1, -1, +2, -2, ..."""
    if k < 1:
        raise ConfigError("tile sheets are numbered from 1")
    m = k // 2
    return m if k % 2 == 0 else -m
