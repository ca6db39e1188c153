"""Matplotlib renderings of diagrams and benchmark tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PatchCollection
from matplotlib.patches import Polygon, Rectangle

from .freespace import FreeSpaceDiagram

BLOCKED = "#3b3b3b"
FREE = "#ffffff"
OUTLINE = "#4a78b5"
MARK = "#d1492e"
ARC_POINTS = 64


def cell_polygon(cell, k: int = ARC_POINTS) -> np.ndarray | None:
    """Outline of a cell's white region in source coordinates (lower chain, then upper reversed)."""
    left, right = cell.extremes()[:2]
    xs = np.linspace(left[0], right[0], k)
    lo, hi = [], []
    for x in xs:
        iv = cell.vertical(float(x))
        if iv.empty:
            continue
        lo.append((x, iv.lo))
        hi.append((x, iv.hi))
    if not lo:
        return None
    return np.array(lo + hi[::-1])


def render_freespace(fsd: FreeSpaceDiagram, path=None, points=None, outlines: bool = True,
                     size: tuple[float, float] = (6.0, 6.0), dpi: int = 100, axes: bool = True):
    """Draw white regions, cell rectangles and critical points; save to ``path`` if given."""
    fig = plt.figure(figsize=size, dpi=dpi)
    ax = fig.add_axes([0.1, 0.1, 0.85, 0.85] if axes else [0, 0, 1, 1])
    W, H = max(fsd.width, 1e-12), max(fsd.height, 1e-12)
    ax.add_patch(Rectangle((0, 0), W, H, facecolor=BLOCKED, edgecolor="none", zorder=0))
    polys = []
    for cell in fsd.cells.values():
        poly = cell_polygon(cell)
        if poly is not None:
            polys.append(Polygon(poly, closed=True))
    ax.add_collection(PatchCollection(polys, facecolor=FREE, edgecolor=FREE, linewidth=0.3, zorder=1))
    if outlines:
        rects = [Rectangle((c.x0, c.y0), c.x1 - c.x0, c.y1 - c.y0) for c in fsd.cells.values()]
        ax.add_collection(PatchCollection(rects, facecolor="none", edgecolor=OUTLINE, linewidth=0.4, zorder=2))
    if points is not None and len(points):
        pts = np.asarray(points, dtype=float)
        ax.plot(pts[:, 0], pts[:, 1], ".", color=MARK, markersize=2, zorder=3)
    ax.set_xlim(0, W)
    ax.set_ylim(0, H)
    ax.set_aspect("auto")
    if axes:
        ax.set_xlabel("arc length along P")
        ax.set_ylabel("arc length along Q")
    else:
        ax.set_axis_off()
    if path is not None:
        fig.savefig(path)
    return fig


def raster(fig) -> np.ndarray:
    """RGB pixels of a rendered figure (row 0 at the top)."""
    fig.canvas.draw()
    return np.asarray(fig.canvas.buffer_rgba())[..., :3].copy()


def render_bench(rows: list[dict], path) -> None:
    """Log-log phase timings against input size."""
    sizes = np.array([r["size"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for key in ("simplify", "near_pairs", "cells", "graph", "sweep", "total"):
        vals = np.array([r.get(key, np.nan) for r in rows], dtype=float)
        if np.all(np.isfinite(vals)) and np.all(vals > 0):
            ax.loglog(sizes, vals, marker="o", label=key)
    ax.set_xlabel("n (vertices)")
    ax.set_ylabel("seconds (median)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
