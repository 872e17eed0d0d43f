"""Lattice scans of sigma_min(I + K_n(z)) and the flagged sets they produce.

``theta_set`` scans one box, ``gamma_n`` takes the union over a tiling.  Each
lattice point is an independent task; chunks may be farmed out to a process
pool, and results are always reassembled in lattice order so the output does
not depend on the number of workers.
"""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptyLattice
from .greens import SheetPoint
from .kernel import KernelAssembler, build_grid
from .metrics import attouch_wets
from .potential import Potential
from .resolvent import ThresholdRule, sigma_min_batch
from .tiling import Box, LatticeSpec, lattice_indices, sheet_index, sheet_tiles, spiral_tiles

log = logging.getLogger(__name__)

CHUNK = 64


@dataclass
class ScanResult:
    """Lattice field of sigma values plus flags.

    Points are stored as parallel arrays; ``lattice`` holds the integer
    coordinates (a, b) with z = h (a + i b), used for adjacency.
    """

    points: np.ndarray
    sheets: np.ndarray
    sigma: np.ndarray
    flags: np.ndarray
    lattice: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def spacing(self) -> float:
        return self.meta["spacing"]

    @property
    def flagged(self) -> list[SheetPoint]:
        return [SheetPoint(z, s) for z, s in zip(self.points[self.flags], self.sheets[self.flags])]

    @property
    def flagged_points(self) -> np.ndarray:
        return self.points[self.flags]

    @property
    def field(self):
        return [(SheetPoint(z, s), float(v)) for z, s, v in zip(self.points, self.sheets, self.sigma)]

    def with_cutoff(self, cutoff: float) -> "ScanResult":
        """Same field re-thresholded at another cutoff."""
        meta = dict(self.meta, cutoff=float(cutoff))
        return ScanResult(self.points, self.sheets, self.sigma, self.sigma <= 1.0 / cutoff,
                          self.lattice, meta)

    def restrict(self, box: Box) -> "ScanResult":
        keep = box.contains(self.points)
        return ScanResult(self.points[keep], self.sheets[keep], self.sigma[keep], self.flags[keep],
                          self.lattice[keep], dict(self.meta))


@dataclass(frozen=True)
class ClusterSummary:
    centroid: complex
    count: int
    min_sigma: float
    sheet: int = 0


# ---------------------------------------------------------------------------
# workers
# ---------------------------------------------------------------------------

_WORKER = {}


def _init_worker(qvals, n, support, d):
    from .potential import SupportBox  # noqa: F401  (unpickled with the support)

    grid = build_grid(support, n)
    _WORKER["asm"] = KernelAssembler(qvals, grid)


def _sigma_chunk(args):
    values, sheet = args
    asm = _WORKER["asm"]
    N = asm.grid.N
    eye = np.eye(N)
    stack = np.empty((len(values), N, N), dtype=complex)
    for k, z in enumerate(values):
        stack[k] = asm.matrix(SheetPoint(z, sheet))
        stack[k] += eye
    return sigma_min_batch(stack)


def resolve_workers(workers=None) -> int:
    env = os.environ.get("RESCAN_WORKERS")
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"RESCAN_WORKERS must be an integer, got {env!r}") from None
    if workers is None:
        workers = 1
    if workers < 1:
        raise ConfigError("worker count must be >= 1")
    return int(workers)


def sigma_field(p: Potential, n: int, values, sheet: int = 0, workers=None, chunk: int = CHUNK) -> np.ndarray:
    """sigma_min(I + K_n(z)) for every z in ``values`` (one sheet)."""
    values = np.asarray(values, dtype=complex)
    grid = build_grid(p.support, n)
    qvals = p(grid.nodes)
    workers = resolve_workers(workers)
    tasks = [(values[i:i + chunk], sheet) for i in range(0, len(values), chunk)]
    if not tasks:
        return np.zeros(0)
    if workers == 1 or len(tasks) == 1:
        _init_worker(qvals, n, p.support, p.d)
        parts = [_sigma_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(qvals, n, p.support, p.d)) as pool:
            parts = list(pool.map(_sigma_chunk, tasks))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def mirror_applies(p: Potential) -> bool:
    """For real q in odd d, K_n(-conj z) = conj K_n(z), so sigma is even in Re z."""
    return p.d % 2 == 1 and p.is_real


def theta_set(p: Potential, n: int, spec: LatticeSpec, rule: ThresholdRule, workers=None,
              mirror: bool = True) -> ScanResult:
    """Scan the lattice of ``spec`` and flag points with sigma <= 1/C_n.

    With ``mirror`` (and a real potential in odd dimension) each pair z, -conj z
    is evaluated once, at the member with Re z >= 0.
    """
    t0 = time.perf_counter()
    ij = lattice_indices(spec)
    if len(ij) == 0:
        raise EmptyLattice(f"no lattice points in {spec.box} at spacing {spec.spacing}")
    h = spec.spacing
    points = h * ij[:, 0] + 1j * h * ij[:, 1]
    if mirror and mirror_applies(p):
        canon = np.column_stack([np.abs(ij[:, 0]), ij[:, 1]])
        uniq, back = np.unique(canon, axis=0, return_inverse=True)
        sigma = sigma_field(p, n, h * uniq[:, 0] + 1j * h * uniq[:, 1], spec.sheet, workers)[back.ravel()]
    else:
        sigma = sigma_field(p, n, points, spec.sheet, workers)
    cutoff = rule.cutoff_at(n)
    meta = {
        "n": int(n),
        "spacing": h,
        "cutoff": cutoff,
        "box": list(spec.box.as_tuple()),
        "sheet": spec.sheet,
        "potential": p.describe(),
        "dimension": p.d,
        "points": int(len(points)),
        "mirror": bool(mirror and mirror_applies(p)),
        "wall_time": time.perf_counter() - t0,
    }
    return ScanResult(points, np.full(len(points), spec.sheet, dtype=np.int64), sigma,
                      sigma <= 1.0 / cutoff, ij, meta)


def _merge(results, meta) -> ScanResult:
    if not results:
        raise EmptyLattice("no lattice points in any tile")
    seen = set()
    keep_parts = []
    for r in results:
        mask = np.zeros(len(r), dtype=bool)
        for k, (a, b) in enumerate(r.lattice):
            key = (int(r.sheets[k]), int(a), int(b))
            if key not in seen:
                seen.add(key)
                mask[k] = True
        keep_parts.append(mask)
    cat = lambda name: np.concatenate([getattr(r, name)[m] for r, m in zip(results, keep_parts)])
    return ScanResult(cat("points"), cat("sheets"), cat("sigma"), cat("flags"), cat("lattice"), meta)


def gamma_n(p: Potential, n: int, tiles: int, spacing: float, rule: ThresholdRule,
            workers=None, exclusion=None, on_tile=None, mirror: bool = True) -> ScanResult:
    """Union of theta_set over the first ``tiles`` spiral tiles (odd d) or over
    the sheet tiling of depth ``tiles`` (even d).

    ``on_tile(tile, result)`` is called after each tile completes, before the
    union is formed.
    """
    t0 = time.perf_counter()
    tile_list = spiral_tiles(tiles) if p.d % 2 else sheet_tiles(tiles)
    results = []
    for tile in tile_list:
        spec = LatticeSpec(tile.box, spacing, sheet_index(tile.sheet), exclusion)
        try:
            res = theta_set(p, n, spec, rule, workers, mirror)
        except EmptyLattice:
            log.warning("tile %s is empty at spacing %g", tile, spacing)
            continue
        res.meta["tile"] = [tile.index, tile.sheet]
        if on_tile is not None:
            on_tile(tile, res)
        results.append(res)
    meta = {
        "n": int(n),
        "spacing": spacing,
        "cutoff": rule.cutoff_at(n),
        "tiles": [[t.index, t.sheet] for t in tile_list],
        "potential": p.describe(),
        "dimension": p.d,
        "wall_time": time.perf_counter() - t0,
    }
    merged = _merge(results, meta)
    merged.meta["points"] = len(merged)
    return merged


def cluster_flags(result: ScanResult) -> list[ClusterSummary]:
    """Connected components of flagged points under 8-neighbour lattice adjacency."""
    idx = np.flatnonzero(result.flags)
    if len(idx) == 0:
        return []
    key_to_pos = {(int(result.sheets[i]), int(result.lattice[i, 0]), int(result.lattice[i, 1])): i for i in idx}
    seen = set()
    clusters = []
    for start in key_to_pos:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        members = []
        while stack:
            key = stack.pop()
            members.append(key_to_pos[key])
            s, a, b = key
            for da in (-1, 0, 1):
                for db in (-1, 0, 1):
                    nb = (s, a + da, b + db)
                    if nb in key_to_pos and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        members = np.array(sorted(members))
        pts = result.points[members]
        clusters.append(ClusterSummary(complex(pts.mean()), len(members),
                                       float(result.sigma[members].min()), start[0]))
    clusters.sort(key=lambda c: (c.centroid.real, c.centroid.imag, c.sheet))
    return clusters


def convergence_diagnostic(p: Potential, n_list, box: Box, spacing, rule: ThresholdRule,
                           workers=None, i_max=30, delta=1e-3, keep_results=False, mirror=True):
    """Attouch-Wets distances between the flagged sets of consecutive resolutions.

    ``spacing`` is a number or a callable n -> spacing.  Returns a list of
    ``(n, distance)`` with the distance to the previous resolution; with
    ``keep_results`` the scans are returned as well.
    """
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2:
        raise ConfigError("convergence diagnostics need at least two resolutions")
    step = spacing if callable(spacing) else (lambda n: spacing)
    results = []
    for n in n_list:
        spec = LatticeSpec(box, float(step(n)))
        results.append(theta_set(p, n, spec, rule, workers, mirror))
    table = []
    for prev, cur in zip(results, results[1:]):
        dist = attouch_wets(prev.restrict(box).flagged_points, cur.restrict(box).flagged_points,
                            i_max=i_max, delta=delta)
        table.append((cur.meta["n"], dist.value))
    return (table, results) if keep_results else table


def local_minima(result: ScanResult, limit: int | None = 10):
    """Unflagged lattice points where sigma is no larger than at any 8-neighbour.

    Returns ``(z, sigma)`` pairs, smallest sigma first (all of them when
    ``limit`` is None); these mark near-misses of the threshold.
    """
    key = {(int(s), int(a), int(b)): k for k, (s, (a, b)) in enumerate(zip(result.sheets, result.lattice))}
    out = []
    for (s, a, b), k in key.items():
        if result.flags[k]:
            continue
        v = result.sigma[k]
        if all(v <= result.sigma[key[(s, a + da, b + db)]]
               for da in (-1, 0, 1) for db in (-1, 0, 1) if (s, a + da, b + db) in key):
            out.append((complex(result.points[k]), float(v)))
    out.sort(key=lambda t: (t[1], t[0].real, t[0].imag))
    return out if limit is None else out[:limit]


def suspect_clusters(clusters, n: int, factor: float = 0.8):
    """Clusters beyond the aliasing bound |Re z| > factor π n."""
    bound = factor * math.pi * n
    return [c for c in clusters if abs(c.centroid.real) > bound]
