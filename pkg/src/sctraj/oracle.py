"""Slow exact reference implementations for differential testing.

Everything here is written against plain vertex arrays and closed-form
point-segment quadratics, sharing no geometry code with the fast path
beyond the input type.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from typing import Callable

import numpy as np

from .errors import GuardError

MAX_BRUTEFORCE_N = 14


def _verts(T) -> np.ndarray:
    v = np.asarray(getattr(T, "vertices", T), dtype=float)
    return v.reshape(-1, 2)


def _arc(v: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(v, axis=0).T))])


def _point_on(v: np.ndarray, arc: np.ndarray, x: float) -> np.ndarray:
    if len(v) == 1:
        return v[0]
    i = min(max(bisect_right(arc.tolist(), x) - 1, 0), len(v) - 2)
    seg = arc[i + 1] - arc[i]
    f = 0.0 if seg == 0 else min(max((x - arc[i]) / seg, 0.0), 1.0)
    return v[i] + f * (v[i + 1] - v[i])


def sub_curve(T, a: float, b: float) -> np.ndarray:
    """Vertices of ``T`` between arc lengths ``a <= b`` (a single point when ``a == b``)."""
    v = _verts(T)
    arc = _arc(v)
    inner = [v[i] for i in range(len(v)) if a < arc[i] < b]
    pts = [_point_on(v, arc, a), *inner]
    if b > a:
        pts.append(_point_on(v, arc, b))
    return np.array(pts)


def _seg_param(p, a, b, d: float):
    """Parameters ``u`` in ``[0, 1]`` with ``|a + u (b - a) - p| <= d``, or ``None``."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    fx, fy = a[0] - p[0], a[1] - p[1]
    A = dx * dx + dy * dy
    if A == 0.0:
        return (0.0, 1.0) if fx * fx + fy * fy <= d * d else None
    B = 2 * (fx * dx + fy * dy)
    C = fx * fx + fy * fy - d * d
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    r = math.sqrt(disc)
    lo, hi = max((-B - r) / (2 * A), 0.0), min((-B + r) / (2 * A), 1.0)
    return (lo, hi) if lo <= hi else None


def frechet_decide(P, Q, d: float) -> bool:
    """Is the continuous Fréchet distance between ``P`` and ``Q`` at most ``d``?"""
    if d < 0:
        return False
    p, q = _verts(P), _verts(Q)
    if len(p) == 1 or len(q) == 1:
        pt, other = (p[0], q) if len(p) == 1 else (q[0], p)
        return bool(np.all(np.hypot(*(other - pt).T) <= d))
    if math.dist(p[0], q[0]) > d or math.dist(p[-1], q[-1]) > d:
        return False
    n, m = len(p) - 1, len(q) - 1
    # L[i][j]: reachable part of the left side of cell (i, j) (param on q edge j)
    # B[i][j]: reachable part of the bottom side (param on p edge i)
    L = [[None] * m for _ in range(n + 1)]
    B = [[None] * (m + 1) for _ in range(n)]
    for j in range(m):
        iv = _seg_param(p[0], q[j], q[j + 1], d)
        if iv is None or iv[0] > 0.0 or (j > 0 and (L[0][j - 1] is None or L[0][j - 1][1] < 1.0)):
            break
        L[0][j] = iv
    for i in range(n):
        iv = _seg_param(q[0], p[i], p[i + 1], d)
        if iv is None or iv[0] > 0.0 or (i > 0 and (B[i - 1][0] is None or B[i - 1][0][1] < 1.0)):
            break
        B[i][0] = iv
    for i in range(n):
        for j in range(m):
            lf, bf = L[i][j], B[i][j]
            right = _seg_param(p[i + 1], q[j], q[j + 1], d)
            top = _seg_param(q[j + 1], p[i], p[i + 1], d)
            if right is not None:
                if bf is not None:
                    L[i + 1][j] = right
                elif lf is not None and right[1] >= lf[0]:
                    L[i + 1][j] = (max(right[0], lf[0]), right[1])
            if top is not None:
                if lf is not None:
                    B[i][j + 1] = top
                elif bf is not None and top[1] >= bf[0]:
                    B[i][j + 1] = (max(top[0], bf[0]), top[1])
    right, top = L[n][m - 1], B[n - 1][m]
    return (right is not None and right[1] >= 1.0) or (top is not None and top[1] >= 1.0)


def frechet_distance(P, Q, tol: float = 1e-9) -> float:
    """Bisection on :func:`frechet_decide`."""
    p, q = _verts(P), _verts(Q)
    lo = max(math.dist(p[0], q[0]), math.dist(p[-1], q[-1]))
    hi = lo + float(np.ptp(np.vstack([p, q]), axis=0).sum()) + 1.0
    if frechet_decide(p, q, lo):
        return lo
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if frechet_decide(p, q, mid):
            hi = mid
        else:
            lo = mid
    return hi


Interval = tuple[float, float]


def _merge(ivs: list[Interval], gap: float = 0.0) -> list[Interval]:
    out: list[list[float]] = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1] + gap:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


class GridReach:
    """Monotone reachability over a grid of convex cells.

    ``vint(x, j)`` returns the white ``y`` interval on the vertical line
    ``x`` inside row ``j``; ``hint(j, x0, x1)`` the white ``x`` interval on
    the horizontal line ``ys[j]`` restricted to ``[x0, x1]``. Between two
    consecutive sweep lines every row must be convex.
    """

    def __init__(self, ys: list[float], vint: Callable, hint: Callable, tol: float = 0.0):
        self.ys = ys
        self.vint = vint
        self.hint = hint
        self.tol = tol

    def rows(self) -> int:
        return len(self.ys) - 1

    def line(self, x: float) -> list[Interval]:
        """White intervals of the full line ``x``, merged across rows."""
        out = []
        for j in range(self.rows()):
            iv = self.vint(x, j)
            if iv is not None:
                out.append(iv)
        return _merge(out, self.tol)

    def close_up(self, x: float, R: list[Interval]) -> list[Interval]:
        """Extend reachable points on line ``x`` upward through white space."""
        out = []
        for lo, hi in self.line(x):
            hits = [a for a, b in R if b >= lo - self.tol and a <= hi + self.tol]
            if hits:
                out.append((max(lo, min(hits)), hi))
        return out

    def step(self, x0: float, R: list[Interval], x1: float) -> list[Interval]:
        """Reachable set on ``x1`` from reachable set ``R`` on ``x0`` (no grid line in between)."""
        out = []
        bottom = None
        tol = self.tol
        for j in range(self.rows()):
            y0, y1 = self.ys[j], self.ys[j + 1]
            left = [max(a, y0) for a, b in R if b >= y0 - tol and a <= y1 + tol]
            yl = min(left) if left else None
            right = self.vint(x1, j)
            top = self.hint(j + 1, x0, x1)
            if right is not None:
                if bottom is not None:
                    out.append(right)
                elif yl is not None and right[1] >= yl - tol:
                    out.append((max(right[0], yl), right[1]))
            nb = None
            if top is not None:
                if yl is not None:
                    nb = top
                elif bottom is not None and top[1] >= bottom[0] - tol:
                    nb = (max(top[0], bottom[0]), top[1])
            bottom = nb
        return _merge(out, tol)

    def sweep(self, x0: float, R: list[Interval], lines: list[float]) -> dict[float, list[Interval]]:
        """Reachable sets on every line of ``lines`` (ascending, all ``>= x0``)."""
        cur = self.close_up(x0, R)
        res = {x0: cur}
        prev = x0
        for x in lines:
            if x <= prev:
                continue
            cur = self.step(prev, cur, x) if cur else []
            res[x] = cur
            prev = x
        return res


class ExactFreeSpace:
    """``D_d(P, Q)`` with closed-form boundary intervals."""

    def __init__(self, P, Q, d: float):
        self.p = _verts(P)
        self.q = _verts(Q)
        self.d = d
        self.px = _arc(self.p)
        self.qy = _arc(self.q)
        self._pxl = self.px.tolist()
        self._qyl = self.qy.tolist()
        self.reach = GridReach(self._qyl, self.vint, self.hint)

    @property
    def width(self) -> float:
        return self._pxl[-1]

    @property
    def height(self) -> float:
        return self._qyl[-1]

    def white(self, x: float, y: float) -> bool:
        return math.dist(_point_on(self.p, self.px, x), _point_on(self.q, self.qy, y)) <= self.d

    def vint(self, x: float, j: int):
        pt = _point_on(self.p, self.px, x)
        iv = _seg_param(pt, self.q[j], self.q[j + 1], self.d)
        if iv is None:
            return None
        y0, y1 = self._qyl[j], self._qyl[j + 1]
        lo = y0 + iv[0] * (y1 - y0) if iv[0] > 0 else y0
        hi = y0 + iv[1] * (y1 - y0) if iv[1] < 1 else y1
        return lo, hi

    def hint(self, j: int, x0: float, x1: float):
        if j >= len(self.q):
            return None
        a, b = _point_on(self.p, self.px, x0), _point_on(self.p, self.px, x1)
        iv = _seg_param(self.q[j], a, b, self.d)
        if iv is None:
            return None
        lo = x0 + iv[0] * (x1 - x0) if iv[0] > 0 else x0
        hi = x0 + iv[1] * (x1 - x0) if iv[1] < 1 else x1
        return lo, hi

    def lines_between(self, s: float, t: float) -> list[float]:
        return [x for x in self._pxl if s < x < t] + [t]

    def lowest_end(self, s: float, a: float, t: float, ycap: float = math.inf) -> float:
        """Lowest ``y <= ycap`` on ``x = t`` reachable from ``(s, a)``, or ``inf``."""
        res = self.reach.sweep(s, [(a, a)], self.lines_between(s, t))
        for lo, hi in res.get(t, []):
            if lo <= ycap:
                return lo
        return math.inf


def greedy_count(space: ExactFreeSpace, s: float, t: float, cap: int, tau: float = 1e-9):
    """Earliest-finish greedy on the exact free space; returns the member ranges."""
    L = space.height
    out: list[tuple[float, float]] = []
    starts = space.reach.line(s)
    for floor, ycap in ((0.0, s), (t, math.inf)):
        while len(out) < cap:
            found = None
            for lo, hi in starts:
                if hi < floor:
                    continue
                a = max(floor, lo)
                if a > ycap:
                    break
                e = space.lowest_end(s, a, t, ycap)
                if e < math.inf:
                    found = (a, e)
                    break
            if found is None:
                break
            out.append(found)
            a, e = found
            floor = e + tau * max(L, 1.0) if e <= a else e
    return out


def _windows(v: np.ndarray, l: float, mode: str, grid: int) -> list[tuple[float, float]]:
    arc = _arc(v).tolist()
    L = arc[-1]
    if mode == "vertex":
        return [(s, t) for i, s in enumerate(arc) for t in arc[i + 1:] if t - s >= l]
    if l > L:
        return []
    hi = L - l
    ss = {hi, *np.linspace(0.0, L, grid + 1).tolist()}
    for x in arc:
        ss.update((x, x - l))
    return [(s, s + l) for s in sorted(ss) if 0.0 <= s <= hi]


def sc_bruteforce(T, q, grid: int = 2048, with_witness: bool = False):
    """Exact decision at distance ``q.d`` by exhaustive window enumeration."""
    v = _verts(T)
    if len(v) > MAX_BRUTEFORCE_N:
        raise GuardError(f"sc_bruteforce accepts at most {MAX_BRUTEFORCE_N} vertices, got {len(v)}")
    L = _arc(v)[-1]
    res = (False, None)
    if q.l > L:
        return res if with_witness else False
    if q.m == 1:
        res = (True, ((0.0, L), ()))
        return res if with_witness else True
    space = ExactFreeSpace(v, v, q.d)
    for s, t in _windows(v, q.l, q.mode, grid):
        paths = greedy_count(space, s, t, q.m - 1)
        if len(paths) >= q.m - 1:
            res = (True, ((s, t), tuple(paths)))
            break
    return res if with_witness else res[0]


def bisect_interval(fun: Callable, a: float, b: float, iters: int = 200):
    """White sub-interval of ``[a, b]`` for a quasi-convex distance-minus-threshold ``fun``.

    ``fun`` maps an array of parameters to values; white means ``<= 0``.
    """
    xs = np.linspace(a, b, 65)
    v = fun(xs)
    k = int(np.argmin(v))
    lo_b, hi_b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    for _ in range(iters):
        if hi_b - lo_b <= 1e-15 * max(1.0, abs(b)):
            break
        m1 = lo_b + (hi_b - lo_b) / 3
        m2 = hi_b - (hi_b - lo_b) / 3
        f1, f2 = fun(np.array([m1, m2]))
        if f1 <= f2:
            hi_b = m2
        else:
            lo_b = m1
    c = 0.5 * (lo_b + hi_b)
    fc = float(fun(np.array([c]))[0])
    if min(fc, float(v[k])) > 0:
        return None
    if float(v[k]) <= fc:
        c = float(xs[k])

    def edge(inside, outside):
        if float(fun(np.array([outside]))[0]) <= 0:
            return outside
        for _ in range(iters):
            mid = 0.5 * (inside + outside)
            if mid in (inside, outside):
                break
            if float(fun(np.array([mid]))[0]) <= 0:
                inside = mid
            else:
                outside = mid
        return inside

    return edge(c, a), edge(c, b)


def simplified_reach(fsd) -> GridReach:
    """:class:`GridReach` over a simplified diagram, intervals by bisection on the pointwise predicate."""
    rows = fsd.y_bounds
    thr = fsd.config.threshold * (1 + 1e-9)

    def vint(x, j):
        y0, y1 = rows[j], rows[j + 1]
        return bisect_interval(lambda ys: fsd.distances(np.full(len(ys), x), ys) - thr, y0, y1)

    def hint(j, x0, x1):
        y = rows[j]
        return bisect_interval(lambda xs: fsd.distances(xs, np.full(len(xs), y)) - thr, x0, x1)

    return GridReach(list(rows), vint, hint, tol=1e-9 * max(fsd.width, 1.0))
