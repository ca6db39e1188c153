"""Deterministic test curves."""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError

KINDS = ("spiral", "lawnmower", "walk", "loop")


def spiral(n: int, spacing: float = 0.5, pitch: float = 1.0) -> np.ndarray:
    """Archimedean spiral ``r = 1 + pitch * theta / (2 pi)`` with roughly ``spacing`` arc length per edge."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    theta = np.empty(n)
    theta[0] = 0.0
    k = pitch / (2 * math.pi)
    for i in range(1, n):
        r = 1.0 + k * theta[i - 1]
        theta[i] = theta[i - 1] + spacing / math.hypot(r, k)
    r = 1.0 + k * theta
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def lawnmower(n: int, width: float = 10.0, gap: float = 1.0, rows: int | None = None) -> np.ndarray:
    """Boustrophedon sweep: passes of length ``width`` stacked ``gap`` apart.

    By default the passes fill a square (``width / gap + 1`` of them).
    """
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not (width > 0 and gap > 0):
        raise ParameterError("width and gap must be positive")
    rows = rows or int(round(width / gap)) + 1
    per = max(2, int(math.ceil(n / rows)))
    pts = []
    row = 0
    while len(pts) < n:
        xs = np.linspace(0.0, width, per)
        if row % 2:
            xs = xs[::-1]
        pts.extend((x, row * gap) for x in xs)
        row += 1
    return np.asarray(pts[:n])


def walk(n: int, seed: int = 0, step: float = 1.0, smooth: int = 5) -> np.ndarray:
    """Random walk with moving-average smoothed headings."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    rng = np.random.default_rng(seed)
    turn = rng.normal(scale=0.6, size=n + smooth)
    turn = np.convolve(turn, np.ones(smooth) / smooth, mode="valid")[: n - 1]
    heading = np.cumsum(turn)
    steps = step * np.column_stack([np.cos(heading), np.sin(heading)])
    return np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])


def loop(n: int, side: float = 0.5) -> np.ndarray:
    """Square of the given side traversed repeatedly, ``n`` vertices."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    sq = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]
    return np.asarray([sq[i % 4] for i in range(n)])


def generate(kind: str, n: int, seed: int = 0, **kw) -> np.ndarray:
    if kind == "spiral":
        return spiral(n, **kw)
    if kind == "lawnmower":
        return lawnmower(n, **kw)
    if kind == "walk":
        return walk(n, seed=seed, **kw)
    if kind == "loop":
        return loop(n, **kw)
    raise ParameterError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
