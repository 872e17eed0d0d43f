"""Compactly supported potentials q on the cube Q_M = [-M/2, M/2]^d.

Potentials are immutable callables on arrays of points of shape ``(..., d)``
(a bare float is accepted for d = 1).  Every potential evaluates to exactly
zero outside Q_M.  The builtin classes are plain picklable objects so that
process pools can ship them to workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, IrregularGrid, MalformedFile, SupportMismatch
from .greens import check_dimension

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class SupportBox:
    """Cube of edge length ``M`` centred at the origin in dimension ``d``."""

    M: float
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "d", check_dimension(self.d))
        if not (self.M > 0 and math.isfinite(self.M)):
            raise ConfigError(f"support edge length M must be positive, got {self.M}")
        object.__setattr__(self, "M", float(self.M))

    @property
    def half(self) -> float:
        return self.M / 2.0

    def contains(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return np.all(np.abs(x) <= self.half, axis=-1)


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise ConfigError(f"expected points with {d} coordinates, got shape {x.shape}")
    return x


def _bump(s):
    """C-infinity bump exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere, bump(0) = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class Potential:
    """Base class; subclasses implement :meth:`_values` on points inside Q_M."""

    support: SupportBox
    kind: str = field(default="builtin-expression", init=False)

    @property
    def d(self) -> int:
        return self.support.d

    @property
    def name(self) -> str:
        return type(self).__name__

    def params(self) -> dict:
        return {}

    def describe(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.name}({args}; M={self.support.M}, d={self.d})"

    def is_real(self) -> bool:
        return all(complex(v).imag == 0 for v in self.params().values() if isinstance(v, (int, float, complex)))

    def _values(self, x):
        raise NotImplementedError

    def __call__(self, x):
        x = _as_points(x, self.d)
        inside = self.support.contains(x)
        out = np.zeros(x.shape[:-1], dtype=complex)
        if np.any(inside):
            out[inside] = self._values(x[inside])
        return out if out.ndim else complex(out)

    def sup_norm(self, samples: int = 201) -> float:
        """Maximum of |q| over a tensor sample grid of Q_M (plus the centre)."""
        axis = np.linspace(-self.support.half, self.support.half, samples)
        mesh = np.stack(np.meshgrid(*([axis] * self.d), indexing="ij"), axis=-1)
        vals = np.abs(self(mesh.reshape(-1, self.d)))
        return float(max(vals.max(), abs(self(np.zeros(self.d)))))


@dataclass(frozen=True)
class ZeroPotential(Potential):
    def _values(self, x):
        return np.zeros(x.shape[0], dtype=complex)


@dataclass(frozen=True)
class SquareWell(Potential):
    """q = -depth on the closed cube [-a, a]^d; a negative depth gives a barrier."""

    depth: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError("square well half-width must be positive")
        if self.a > self.support.half + 1e-12:
            raise ConfigError(f"well half-width {self.a} exceeds the support half-width {self.support.half}")

    def params(self):
        return {"depth": self.depth, "a": self.a}

    def _values(self, x):
        inside = np.all(np.abs(x) <= self.a, axis=-1)
        return np.where(inside, -self.depth, 0.0).astype(complex)


def square_barrier(support: SupportBox, height: float = 1.0, a: float = 1.0) -> SquareWell:
    return SquareWell(support, depth=-height, a=a)


@dataclass(frozen=True)
class TruncatedGaussian(Potential):
    """q(x) = -amplitude exp(-|x|^2/width^2) bump(|x|/radius).

    ``radius`` defaults to 0.95 M/2, keeping the support strictly inside Q_M.
    """

    amplitude: float = 1.0
    width: float = 0.5
    radius: float | None = None

    def __post_init__(self):
        if self.radius is None:
            object.__setattr__(self, "radius", 0.95 * self.support.half)
        if not (0 < self.radius <= self.support.half):
            raise ConfigError("cutoff radius must lie in (0, M/2]")
        if not self.width > 0:
            raise ConfigError("Gaussian width must be positive")

    def params(self):
        return {"amplitude": self.amplitude, "width": self.width, "radius": self.radius}

    def _values(self, x):
        r2 = np.sum(x * x, axis=-1)
        return (-self.amplitude * np.exp(-r2 / self.width**2) * _bump(np.sqrt(r2) / self.radius)).astype(complex)


@dataclass(frozen=True)
class DoubleBump(Potential):
    """Smooth trapping profile: two bumps of height ``amplitude`` at ±``center``.

    In d >= 2 the pair becomes a radial ring at |x| = ``center``.
    """

    amplitude: float = 1.0
    center: float = 0.6
    width: float = 0.3

    def __post_init__(self):
        if self.center + self.width > self.support.half + 1e-12:
            raise ConfigError("double bump does not fit inside the support cube")
        if not self.width > 0:
            raise ConfigError("bump width must be positive")

    def params(self):
        return {"amplitude": self.amplitude, "center": self.center, "width": self.width}

    def _values(self, x):
        if self.d == 1:
            s = x[:, 0]
            v = _bump((s - self.center) / self.width) + _bump((s + self.center) / self.width)
        else:
            v = _bump((np.sqrt(np.sum(x * x, axis=-1)) - self.center) / self.width)
        return (self.amplitude * v).astype(complex)


@dataclass(frozen=True, eq=False)
class SampledPotential(Potential):
    """Multilinear interpolant of samples on a tensor grid covering Q_M."""

    axes: tuple = ()
    samples: np.ndarray = None
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", "sampled-grid")
        interp = RegularGridInterpolator(self.axes, self.samples, method="linear",
                                         bounds_error=False, fill_value=0.0)
        object.__setattr__(self, "_interp", interp)

    def params(self):
        return {"file": self.source, "shape": "x".join(str(len(a)) for a in self.axes)}

    def is_real(self):
        return bool(np.all(np.imag(self.samples) == 0))

    def _values(self, x):
        return self._interp(x)

    def __reduce__(self):
        return (_rebuild_sampled, (self.support, self.axes, self.samples, self.source))


def _rebuild_sampled(support, axes, samples, source):
    return SampledPotential(support, axes=axes, samples=samples, source=source)


def eval_potential(p: Potential, x):
    """q(x) for one point or an array of points; exactly zero outside Q_M."""
    return p(x)


def load_sampled_potential(path, support: SupportBox) -> SampledPotential:
    """Read ``x_1 .. x_d Re(q) Im(q)`` records (``#`` starts a comment line)."""
    path = Path(path)
    d = support.d
    text = path.read_text(encoding="utf-8")
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != d + 2:
            raise MalformedFile(f"{path}:{lineno}: expected {d + 2} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise MalformedFile(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise MalformedFile(f"{path}: no data records")
    data = np.array(rows)
    coords, values = data[:, :d], data[:, d] + 1j * data[:, d + 1]
    if not np.all(np.isfinite(data)):
        raise MalformedFile(f"{path}: non-finite values")

    axes = tuple(np.unique(coords[:, k]) for k in range(d))
    shape = tuple(len(a) for a in axes)
    if any(s < 2 for s in shape):
        raise IrregularGrid(f"{path}: every axis needs at least two sample coordinates")
    if int(np.prod(shape)) != len(rows):
        raise IrregularGrid(f"{path}: {len(rows)} records do not form a {'x'.join(map(str, shape))} tensor grid")
    idx = tuple(np.searchsorted(axes[k], coords[:, k]) for k in range(d))
    grid = np.full(shape, np.nan + 0j)
    grid[idx] = values
    if np.any(np.isnan(grid.real)):
        raise IrregularGrid(f"{path}: duplicate records leave grid nodes unset")

    h = support.half
    for k, a in enumerate(axes):
        if a[0] > -h + BOUNDARY_TOL or a[-1] < h - BOUNDARY_TOL:
            raise SupportMismatch(f"{path}: samples on axis {k} span [{a[0]}, {a[-1]}], not covering [-{h}, {h}]")
    on_or_out = np.any(np.abs(coords) >= h - BOUNDARY_TOL, axis=-1)
    bad = on_or_out & (np.abs(values) > BOUNDARY_TOL)
    if np.any(bad):
        x0 = coords[np.argmax(bad)]
        raise SupportMismatch(f"{path}: nonzero sample at {x0.tolist()} on or outside the boundary of Q_M")
    return SampledPotential(support, axes=axes, samples=grid, source=str(path))


BUILTINS = {
    "zero": lambda support: ZeroPotential(support),
    "square_well": lambda support, depth=1.0, a=1.0: SquareWell(support, depth=depth, a=a),
    "square_barrier": lambda support, height=1.0, a=1.0: square_barrier(support, height, a),
    "gaussian": lambda support, amplitude=1.0, width=0.5, radius=None: TruncatedGaussian(
        support, amplitude=amplitude, width=width, radius=radius),
    "double_bump": lambda support, amplitude=1.0, center=0.6, width=0.3: DoubleBump(
        support, amplitude=amplitude, center=center, width=width),
}


def make_builtin(name: str, support: SupportBox, **params) -> Potential:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin potential {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(support, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None
