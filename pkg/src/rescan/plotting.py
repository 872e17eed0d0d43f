"""Optional figure rendering (``pip install rescan[plot]``).

The CSV files are the primary output; this only draws log10 sigma over the
lattice with cluster centroids and, when given, reference zeros on top.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise ImportError("figures need matplotlib: pip install 'rescan[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.linewidth": 0.6, "savefig.dpi": 200,
                         "xtick.direction": "in", "ytick.direction": "in"})
    return plt


def plot_field(result, path, clusters=(), zeros=(), sheet=0):
    """Render one sheet of a scan to ``path``; returns the path."""
    plt = _pyplot()
    sel = result.sheets == sheet
    ij = result.lattice[sel]
    h = result.spacing
    a0, b0 = ij.min(axis=0)
    img = np.full(tuple(ij.max(axis=0) - (a0, b0) + 1)[::-1], np.nan)
    img[ij[:, 1] - b0, ij[:, 0] - a0] = np.log10(np.maximum(result.sigma[sel], 1e-300))
    extent = [(a0 - 0.5) * h, (ij[:, 0].max() + 0.5) * h, (b0 - 0.5) * h, (ij[:, 1].max() + 0.5) * h]

    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    im = ax.imshow(img, origin="lower", extent=extent, aspect="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label=r"$\log_{10}\sigma_{\min}$")
    pts = [c.centroid for c in clusters if c.sheet == sheet]
    if pts:
        ax.plot(np.real(pts), np.imag(pts), "r+", ms=7, mew=1.0, label="clusters")
    if len(zeros):
        ax.plot(np.real(zeros), np.imag(zeros), "wo", mfc="none", ms=6, label="reference")
    if pts or len(zeros):
        ax.legend(loc="lower right", frameon=False)
    ax.set_xlabel(r"Re $z$")
    ax.set_ylabel(r"Im $z$")
    ax.set_title(f"n = {result.meta.get('n')}, h = {h:g}, C = {result.meta.get('cutoff'):g}")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path
