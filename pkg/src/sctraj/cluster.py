"""Subtrajectory cluster decision on a single trajectory.

The diagram is the simplified free space of ``T`` against itself. A window
``(s, t)`` fixes the reference ``T[s, t]``; every member is a monotone white
path from the line ``x = s`` to ``x = t`` whose ``y`` span avoids the open
band ``(s, t)``. Paths below and above the band are counted independently
with the earliest-finish greedy.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError
from .freespace import FreeSpaceConfig, FreeSpaceDiagram, build_diagram
from .geom import TAU, Trajectory, as_trajectory
from .reachability import (
    ReachabilityGraph,
    SweepContext,
    build_graph,
    extract_boundary_critical_points,
    insert_greedy_point,
)
from .structures import RowIntervalTree

VERTEX = "vertex"
ARBITRARY = "arbitrary"

END_OF_CELL = "end-of-cell"
PROPAGATED = "propagated"
L_APART = "l-apart"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class ClusterQuery:
    m: int
    l: float
    d: float
    eps: float
    mode: str = VERTEX

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m}")
        for name in ("l", "d", "eps"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be positive, got {v}")
        if self.mode not in (VERTEX, ARBITRARY):
            raise ParameterError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class Window:
    s: float
    t: float


@dataclass(frozen=True)
class InternalCriticalPoint:
    position: tuple[float, float]
    kind: str


@dataclass(frozen=True)
class ClusterWitness:
    reference: tuple[float, float]
    members: tuple[tuple[float, float], ...]


@dataclass
class Decision:
    """Answer plus what it took to get there."""

    answer: bool
    witness: ClusterWitness | None
    l_used: float
    perturbed: bool = False
    timings: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)


def windows_vertex(T: Trajectory, l: float) -> list[Window]:
    """For each vertex ``s``, the first vertex ``t`` with ``t - s >= l``."""
    if not l > 0:
        raise ParameterError(f"l must be positive, got {l}")
    pre = T._pre
    out = []
    for i, s in enumerate(pre):
        j = max(bisect_left(pre, s + l) - 1, i + 1)
        while j < len(pre) and pre[j] - s < l:
            j += 1
        if j == len(pre):
            break
        out.append(Window(s, pre[j]))
    return out


def _roots(fun, lo: float, hi: float, samples: int = 129) -> tuple[list[float], bool]:
    """Roots of a vectorised ``fun`` (returning values and a validity mask) on ``[lo, hi]``.

    Returns the roots and whether ``fun`` vanishes on a whole sub-interval.
    """
    if not hi > lo:
        return [], False
    xs = np.linspace(lo, hi, samples)
    v, ok = fun(xs)
    scale = max(1.0, abs(hi))
    flat = ok & (np.abs(v) <= 1e-9 * scale)
    # three consecutive vanishing samples: the analytic curves coincide on an interval
    if np.any(flat[:-2] & flat[1:-1] & flat[2:]):
        return [], True
    out = []
    zero = ok & (v == 0)
    out.extend(xs[zero].tolist())
    both = ok[:-1] & ok[1:]
    change = both & (np.sign(v[:-1]) * np.sign(v[1:]) < 0)

    def scalar(x):
        return float(fun(np.array([x]))[0][0])

    for i in np.nonzero(change)[0]:
        try:
            out.append(brentq(scalar, xs[i], xs[i + 1], xtol=1e-12 * scale))
        except ValueError:
            out.append(0.5 * (xs[i] + xs[i + 1]))
    return out, False


def _row_pairs(fsd: FreeSpaceDiagram, l: float):
    """Cell pairs ``(A, B)`` of a row with ``B`` overlapping ``A`` shifted right by ``l``."""
    for r, cols in fsd.by_row.items():
        cells = [fsd.cells[(r, c)] for c in cols]
        for A in cells:
            for B in cells:
                lo = max(A.x0, B.x0 - l)
                hi = min(A.x1, B.x1 - l)
                if hi > lo:
                    yield A, B, lo, hi


def _p_pieces(cell):
    """Affine pieces ``(x_lo, x_hi, c0, c1)`` with simplified point ``c0 + c1 x`` (global ``x``)."""
    p = cell.geometry.p
    out = []
    for t0, t1, k, b in p.pieces():
        c1 = (p.dx * k, p.dy * k)
        base = b - k * cell.x0
        out.append((cell.x0 + t0, cell.x0 + t1, (p.ux + p.dx * base, p.uy + p.dy * base), c1))
    return out


def perturb_if_degenerate(fsd: FreeSpaceDiagram, l: float) -> tuple[float, bool]:
    """Shift ``l`` by ``eps^2 d`` when two cells of a row carry the same boundary exactly ``l`` apart."""
    cfg = fsd.config
    L = max(fsd.width, 1.0)
    tol = 1e-9 * L
    for A, B, lo, hi in _row_pairs(fsd, l):
        for a0, a1, ca, va in _p_pieces(A):
            for b0, b1, cb, vb in _p_pieces(B):
                if min(a1, b1 - l) - max(a0, b0 - l) <= tol:
                    continue
                if abs(va[0] - vb[0]) > 1e-9 or abs(va[1] - vb[1]) > 1e-9:
                    continue
                sx, sy = cb[0] + vb[0] * l, cb[1] + vb[1] * l
                if math.hypot(ca[0] - sx, ca[1] - sy) <= tol:
                    return l + cfg.eps * cfg.eps * cfg.d, True
    return l, False


def _curve(cell, which: int, shift: float = 0.0):
    """Vectorised lower (0) or upper (1) boundary ``y`` of ``cell`` at global ``x + shift``."""
    g = cell.geometry

    def f(xs):
        lo, hi, ok_lo, ok_hi = g.curves(xs + shift - cell.x0)
        return (cell.y0 + (lo if which == 0 else hi)), (ok_lo if which == 0 else ok_hi)

    return f


def l_apart_points(fsd: FreeSpaceDiagram, l: float) -> tuple[list[tuple[float, float]], bool]:
    """Points ``(x, y)`` on a boundary curve with another boundary point at ``(x + l, y)`` in the same row.

    The flag reports a pair whose curves coincide on an interval (infinitely many solutions).
    """
    out = []
    infinite = False
    for A, B, lo, hi in _row_pairs(fsd, l):
        for wa in (0, 1):
            fa = _curve(A, wa)
            for wb in (0, 1):
                fb = _curve(B, wb, l)

                def diff(xs, fa=fa, fb=fb):
                    ya, oa = fa(xs)
                    yb, ob = fb(xs)
                    return ya - yb, oa & ob

                roots, inf_ = _roots(diff, lo, hi)
                infinite |= inf_
                for x in roots:
                    out.append((x, float(fa(np.array([x]))[0][0])))
    return out, infinite


def _propagated(fsd: FreeSpaceDiagram, sources: list[tuple[float, float]]) -> list[tuple[float, float]]:
    by_row: dict[int, list[float]] = {}
    for x, y in sources:
        r = fsd.row_of(y)
        if y != fsd.row_y(r):
            by_row.setdefault(r, []).append(y)
    out = []
    for r, ys in by_row.items():
        cols = fsd.by_row.get(r, ())
        tree = RowIntervalTree((*fsd.cells[(r, c)].y_span(), c) for c in cols)
        for y in set(ys):
            for c in tree.stab(y):
                cell = fsd.cells[(r, c)]
                iv = cell.horizontal(y)
                if iv.empty:
                    continue
                for x in (iv.lo, iv.hi):
                    if cell.x0 < x < cell.x1:
                        out.append((x, y))
    return out


def internal_critical_points(fsd: FreeSpaceDiagram, l: float) -> list[InternalCriticalPoint]:
    """End-of-cell, propagated, l-apart and boundary critical points, sorted by ``x``."""
    pts: dict[tuple[float, float], str] = {}
    for p in extract_boundary_critical_points(fsd):
        pts.setdefault(p.position, BOUNDARY)
    for cell in fsd.cells.values():
        ext = cell.extremes()
        for q in ext[:2]:
            pts.setdefault(q, END_OF_CELL)
    for q in _propagated(fsd, list(pts)):
        pts.setdefault(q, PROPAGATED)
    apart, _ = l_apart_points(fsd, l)
    for q in apart:
        pts.setdefault(q, L_APART)
    return [InternalCriticalPoint(q, k) for q, k in sorted(pts.items())]


def _band_events(fsd: FreeSpaceDiagram, l: float) -> list[float]:
    """Window starts where a boundary curve meets ``y = s`` at ``x = s + l`` or ``y = s + l`` at ``x = s``."""
    out = []
    for cell in fsd.cells.values():
        for which in (0, 1):
            f = _curve(cell, which)
            for off in (l, -l):

                def diff(xs, f=f, off=off):
                    y, ok = f(xs)
                    return y - (xs + off), ok

                roots, _ = _roots(diff, cell.x0, cell.x1, 33)
                out.extend(x if off > 0 else x - l for x in roots)
    return out


def windows_arbitrary(fsd: FreeSpaceDiagram, points: list[InternalCriticalPoint], l: float) -> list[Window]:
    """Windows ``(s, s + l)`` over all event starts and the midpoints between them."""
    L = fsd.width
    hi = L - l
    if hi < 0:
        return []
    cand = {0.0, hi}
    for p in points:
        x, y = p.position
        cand.update((x, x - l, y, y - l))
    for b in fsd.x_bounds:
        cand.update((b, b - l))
    cand.update(_band_events(fsd, l))
    ss = sorted(s for s in cand if 0.0 <= s <= hi)
    full = []
    for a, b in zip(ss, ss[1:]):
        full.append(a)
        if b - a > TAU * L:
            full.append(0.5 * (a + b))
    full.append(ss[-1])
    return [Window(s, min(s + l, L)) for s in full]


def _next_floor(a: float, e: float, L: float) -> float:
    # a zero-length member may not be repeated
    return e + TAU * max(L, 1.0) if e <= a else e


def greedy_paths(fsd: FreeSpaceDiagram, g: ReachabilityGraph, w: Window, cap: int,
                 contexts: dict | None = None, below: bool = True, above: bool = True):
    """Member paths ``(start_y, end_y)`` chosen greedily, at most ``cap`` of them."""
    s, t = w.s, w.t
    L = fsd.height
    if not (0.0 <= s < t <= fsd.width * (1 + TAU)):
        raise ParameterError(f"invalid window ({s}, {t})")
    out: list[tuple[float, float]] = []
    if cap <= 0:
        return out
    if contexts is None:
        contexts = {}
    intervals = fsd.line_intervals(s)
    for side, floor, ycap in (("below", 0.0, s), ("above", t, math.inf)):
        if (side == "below" and not below) or (side == "above" and not above):
            continue
        key = (t, ycap)
        ctx = contexts.get(key)
        if ctx is None:
            ctx = contexts[key] = SweepContext(g, t, ycap)
        while len(out) < cap:
            found = None
            for iv in intervals:
                if iv.hi < floor:
                    continue
                a = max(floor, iv.lo)
                if a > ycap:
                    break
                e = ctx.best_end(insert_greedy_point(g, (s, a)))
                if e < math.inf:
                    found = (a, e)
                    break
            if found is None:
                break
            out.append(found)
            floor = _next_floor(*found, L)
    return out


def count_disjoint_paths(fsd: FreeSpaceDiagram, g: ReachabilityGraph, w: Window, cap: int) -> int:
    """Greedy number of pairwise disjoint member paths for window ``w``, saturating at ``cap``."""
    if cap < 0:
        raise ParameterError(f"cap must be non-negative, got {cap}")
    return len(greedy_paths(fsd, g, w, cap))


def decide_full(T, q: ClusterQuery) -> Decision:
    """Decide the cluster query and report phase timings and counts."""
    T = as_trajectory(T)
    L = T.total_length
    timings = {k: 0.0 for k in ("simplify", "near_pairs", "cells", "graph", "sweep")}
    if q.l > L:
        return Decision(False, None, q.l, timings=timings)
    if q.m == 1:
        return Decision(True, ClusterWitness((0.0, L), ()), q.l, timings=timings)
    cfg = FreeSpaceConfig(q.d, q.eps)
    fsd = build_diagram(T, T, cfg, timings)
    t0 = time.perf_counter()
    g = build_graph(fsd)
    l_used, perturbed = q.l, False
    points: list[InternalCriticalPoint] = []
    if q.mode == VERTEX:
        windows = windows_vertex(T, q.l)
    else:
        l_used, perturbed = perturb_if_degenerate(fsd, q.l)
        points = internal_critical_points(fsd, l_used)
        windows = windows_arbitrary(fsd, points, l_used)
    t1 = time.perf_counter()
    timings["graph"] += t1 - t0
    counts = {
        "cells": len(fsd),
        "boundary_points": sum(1 for k in g.kinds if k == "boundary"),
        "internal_points": len(points),
        "windows": len(windows),
    }
    for kind in (END_OF_CELL, PROPAGATED, L_APART, BOUNDARY):
        counts[f"points_{kind}"] = sum(1 for p in points if p.kind == kind)
    witness = None
    cap = q.m - 1
    if windows:
        ss = np.array([w.s for w in windows])
        ts = np.array([w.t for w in windows])
        lo_t, _ = fsd.line_extents(ts)
        _, hi_s = fsd.line_extents(ss)
        below_ok = lo_t <= ss
        above_ok = hi_s >= ts
        contexts: dict = {}
        examined = 0
        for i, w in enumerate(windows):
            if not (below_ok[i] or above_ok[i]):
                continue
            examined += 1
            if contexts and next(iter(contexts))[0] != w.t:
                contexts = {}
            paths = greedy_paths(fsd, g, w, cap, contexts, bool(below_ok[i]), bool(above_ok[i]))
            if len(paths) >= cap:
                witness = ClusterWitness((w.s, w.t), tuple(paths))
                break
        counts["windows_examined"] = examined
    timings["sweep"] += time.perf_counter() - t1
    counts["graph_nodes"] = len(g.xs)
    counts["graph_edges"] = g.edge_count
    return Decision(witness is not None, witness, l_used, perturbed, timings, counts)


def decide(T, q: ClusterQuery) -> tuple[bool, ClusterWitness | None]:
    """``(answer, witness)`` for the query on trajectory ``T``."""
    r = decide_full(T, q)
    return r.answer, r.witness
