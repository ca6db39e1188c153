"""Planar geometry primitives: points, segments, balls and arc-length polylines.

Everything is plain double precision. ``TAU`` is the relative tolerance used
wherever a comparison has to absorb rounding (it is always scaled by a local
magnitude such as a length or a radius).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NoExitError, ParameterError

TAU = 1e-9


class Point(NamedTuple):
    x: float
    y: float


def _check_point(p) -> Point:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ParameterError(f"non-finite coordinate in {p!r}")
    return Point(x, y)


@dataclass(frozen=True)
class Segment:
    start: Point
    end: Point

    def __post_init__(self):
        object.__setattr__(self, "start", _check_point(self.start))
        object.__setattr__(self, "end", _check_point(self.end))
        if self.start == self.end:
            raise ParameterError("zero-length segment")

    @property
    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _check_point(self.center))
        if not self.radius > 0:
            raise ParameterError(f"ball radius must be positive, got {self.radius}")


class Trajectory:
    """Polyline with an exact arc-length parameterisation.

    Consecutive duplicate vertices are merged on construction, so every edge
    has positive length and ``prefix`` is strictly increasing.

    Parameters
    ----------
    vertices : array_like
        ``(n, 2)`` coordinates; at least two distinct points must remain
        after merging duplicates.
    """

    __slots__ = ("vertices", "prefix", "_xs", "_ys", "_pre")

    def __init__(self, vertices):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ParameterError("vertices must be an (n, 2) array")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("vertices contain NaN or infinity")
        keep = [0]
        for i in range(1, len(pts)):
            if pts[i, 0] != pts[keep[-1], 0] or pts[i, 1] != pts[keep[-1], 1]:
                keep.append(i)
        pts = pts[keep]
        if len(pts) < 2:
            raise ParameterError("a trajectory needs at least two distinct vertices")
        seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
        self.vertices = pts
        self.vertices.setflags(write=False)
        self.prefix = np.concatenate([[0.0], np.cumsum(seg)])
        self.prefix.setflags(write=False)
        # python-float mirrors: scalar queries dominate the hot loops
        self._xs = pts[:, 0].tolist()
        self._ys = pts[:, 1].tolist()
        self._pre = self.prefix.tolist()

    def __len__(self) -> int:
        return len(self._xs)

    def __repr__(self) -> str:
        return f"Trajectory(n={len(self)}, length={self.total_length:.6g})"

    @property
    def n(self) -> int:
        return len(self._xs)

    @property
    def total_length(self) -> float:
        return self._pre[-1]

    def vertex(self, i: int) -> Point:
        return Point(self._xs[i], self._ys[i])

    def edge(self, i: int) -> Segment:
        return Segment(self.vertex(i), self.vertex(i + 1))

    def edges(self) -> list[Segment]:
        return [self.edge(i) for i in range(self.n - 1)]

    def edge_index(self, x: float) -> int:
        """Index of the edge containing arc length ``x`` (last edge for the end)."""
        i = bisect_right(self._pre, x) - 1
        return min(max(i, 0), self.n - 2)

    def point_at(self, x: float) -> Point:
        return point_at(self, x)

    def points_at(self, xs) -> np.ndarray:
        """Vectorised :func:`point_at` for an array of arc lengths (no range check)."""
        xs = np.clip(np.asarray(xs, dtype=float), 0.0, self.total_length)
        idx = np.clip(np.searchsorted(self.prefix, xs, side="right") - 1, 0, self.n - 2)
        lam = (xs - self.prefix[idx]) / (self.prefix[idx + 1] - self.prefix[idx])
        a = self.vertices[idx]
        b = self.vertices[idx + 1]
        return a + (b - a) * lam[:, None]

    def sub_vertices(self, a: float, b: float) -> np.ndarray:
        """Vertices of the subcurve between arc lengths ``a <= b`` (may be one point)."""
        a, b = _clamp_param(self, a), _clamp_param(self, b)
        if b < a:
            raise ParameterError("subcurve bounds out of order")
        pts = [point_at(self, a)]
        i = bisect_right(self._pre, a)
        while i < self.n and self._pre[i] < b:
            pts.append(self.vertex(i))
            i += 1
        if b > a:
            pts.append(point_at(self, b))
        return np.asarray(pts, dtype=float)


def _clamp_param(T: Trajectory, x: float) -> float:
    L = T.total_length
    tol = TAU * L
    if x < -tol or x > L + tol or math.isnan(x):
        raise ParameterError(f"arc length {x} outside [0, {L}]")
    return min(max(x, 0.0), L)


def point_at(T: Trajectory, x: float) -> Point:
    """Point at arc length ``x`` along ``T``.

    Values within ``1e-9 * |T|`` outside the domain are clamped; anything
    further out raises :class:`ParameterError`.

    >>> T = Trajectory([(0, 0), (3, 0), (3, 4)])
    >>> point_at(T, 5.0)
    Point(x=3.0, y=2.0)
    """
    x = _clamp_param(T, x)
    i = T.edge_index(x)
    a, b = T._pre[i], T._pre[i + 1]
    lam = (x - a) / (b - a)
    x0, y0 = T._xs[i], T._ys[i]
    return Point(x0 + (T._xs[i + 1] - x0) * lam, y0 + (T._ys[i + 1] - y0) * lam)


def _pt_seg(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - ax, py - ay)
    lam = ((px - ax) * dx + (py - ay) * dy) / den
    lam = 0.0 if lam < 0.0 else (1.0 if lam > 1.0 else lam)
    return math.hypot(px - ax - lam * dx, py - ay - lam * dy)


def point_segment_distance(p, s: Segment) -> float:
    return _pt_seg(p[0], p[1], s.start.x, s.start.y, s.end.x, s.end.y)


def _cross(ax, ay, bx, by) -> float:
    return ax * by - ay * bx


def _segments_intersect(a0, a1, b0, b1) -> bool:
    d1 = _cross(b1[0] - b0[0], b1[1] - b0[1], a0[0] - b0[0], a0[1] - b0[1])
    d2 = _cross(b1[0] - b0[0], b1[1] - b0[1], a1[0] - b0[0], a1[1] - b0[1])
    d3 = _cross(a1[0] - a0[0], a1[1] - a0[1], b0[0] - a0[0], b0[1] - a0[1])
    d4 = _cross(a1[0] - a0[0], a1[1] - a0[1], b1[0] - a0[0], b1[1] - a0[1])
    return ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4))


def seg_seg_dist(a0, a1, b0, b1) -> float:
    """Distance between closed segments given as coordinate pairs."""
    if _segments_intersect(a0, a1, b0, b1):
        return 0.0
    return min(
        _pt_seg(a0[0], a0[1], b0[0], b0[1], b1[0], b1[1]),
        _pt_seg(a1[0], a1[1], b0[0], b0[1], b1[0], b1[1]),
        _pt_seg(b0[0], b0[1], a0[0], a0[1], a1[0], a1[1]),
        _pt_seg(b1[0], b1[1], a0[0], a0[1], a1[0], a1[1]),
    )


def segment_segment_distance(a: Segment, b: Segment) -> float:
    return seg_seg_dist(a.start, a.end, b.start, b.end)


def ball_exit_point(T: Trajectory, start_x: float, ball: Ball) -> float:
    """Arc length of the first point after ``start_x`` on the ball boundary.

    A vertex lying on the boundary (within ``TAU * radius``) counts as
    outside, so the exit is reported at that vertex.

    Raises
    ------
    NoExitError
        If the rest of the trajectory never leaves the ball.
    """
    start_x = _clamp_param(T, start_x)
    cx, cy = ball.center
    r = ball.radius
    p = point_at(T, start_x)
    if math.hypot(p.x - cx, p.y - cy) >= r * (1 - TAU):
        raise ParameterError("start point is not strictly inside the ball")
    i = T.edge_index(start_x)
    ax, ay = p
    base = start_x
    for j in range(i, T.n - 1):
        bx, by = T._xs[j + 1], T._ys[j + 1]
        if math.hypot(bx - cx, by - cy) >= r * (1 - TAU):
            dx, dy = bx - ax, by - ay
            fx, fy = ax - cx, ay - cy
            qa = dx * dx + dy * dy
            qb = 2.0 * (fx * dx + fy * dy)
            qc = fx * fx + fy * fy - r * r
            disc = max(qb * qb - 4.0 * qa * qc, 0.0)
            # start is inside (qc < 0) so the larger root is the exit
            lam = (-qb + math.sqrt(disc)) / (2.0 * qa)
            lam = min(max(lam, 0.0), 1.0)
            return base + lam * math.sqrt(qa)
        base = T._pre[j + 1]
        ax, ay = bx, by
    raise NoExitError("trajectory suffix stays inside the ball")


def line_stadium_interval(ox, oy, dx, dy, ax, ay, bx, by, r) -> tuple[float, float] | None:
    """Parameters ``lam`` with ``dist(o + lam*d, segment ab) <= r``.

    ``d`` must be a unit vector. The set is an interval because the
    r-neighbourhood of a segment is convex. Returns ``None`` when empty.
    """
    lo, hi = math.inf, -math.inf
    for cx, cy in ((ax, ay), (bx, by)):
        fx, fy = ox - cx, oy - cy
        half_b = fx * dx + fy * dy
        c = fx * fx + fy * fy - r * r
        disc = half_b * half_b - c
        if disc >= 0.0:
            s = math.sqrt(disc)
            lo = min(lo, -half_b - s)
            hi = max(hi, -half_b + s)
    ex, ey = bx - ax, by - ay
    L = math.hypot(ex, ey)
    if L > 0.0:
        ux, uy = ex / L, ey / L
        # |perp| <= r and 0 <= proj <= L, both affine in lam
        p0 = (ox - ax) * ux + (oy - ay) * uy
        p1 = dx * ux + dy * uy
        q0 = _cross(ux, uy, ox - ax, oy - ay)
        q1 = _cross(ux, uy, dx, dy)
        slo, shi = -math.inf, math.inf
        for c0, c1, lower, upper in ((p0, p1, 0.0, L), (q0, q1, -r, r)):
            if abs(c1) < 1e-15:
                if not (lower <= c0 <= upper):
                    slo, shi = math.inf, -math.inf
                    break
            else:
                t1, t2 = (lower - c0) / c1, (upper - c0) / c1
                if t1 > t2:
                    t1, t2 = t2, t1
                slo, shi = max(slo, t1), min(shi, t2)
        if slo <= shi:
            lo, hi = min(lo, slo), max(hi, shi)
    if lo > hi:
        return None
    return lo, hi


def disk_chord_lengths(pts: np.ndarray, cx: float, cy: float, r: float) -> float:
    """Total length of the polyline ``pts`` inside the closed disk B((cx, cy), r)."""
    a = pts[:-1]
    b = pts[1:]
    d = b - a
    f = a - np.array([cx, cy])
    qa = np.einsum("ij,ij->i", d, d)
    qb = 2.0 * np.einsum("ij,ij->i", f, d)
    qc = np.einsum("ij,ij->i", f, f) - r * r
    disc = qb * qb - 4.0 * qa * qc
    ok = (disc > 0.0) & (qa > 0.0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.clip((-qb - sq) / (2.0 * qa), 0.0, 1.0)
        t2 = np.clip((-qb + sq) / (2.0 * qa), 0.0, 1.0)
    inside = np.where(ok, (t2 - t1), 0.0) * np.sqrt(qa)
    return float(inside.sum())


def packedness_witness(T: Trajectory, samples: int = 16) -> tuple[float, Point, float]:
    """Best candidate ball for :func:`packedness_lower_bound`: ``(ratio, center, radius)``."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    pts = T.vertices
    mids = 0.5 * (pts[:-1] + pts[1:])
    centers = np.vstack([pts, mids])
    probe = T.points_at(np.linspace(0.0, T.total_length, samples))
    best = (0.0, Point(*pts[0]), 0.0)
    for cx, cy in centers:
        radii = np.unique(np.hypot(probe[:, 0] - cx, probe[:, 1] - cy))
        for r in radii[radii > 0.0]:
            ratio = disk_chord_lengths(pts, cx, cy, float(r)) / r
            if ratio > best[0]:
                best = (ratio, Point(float(cx), float(cy)), float(r))
    return best


def packedness_lower_bound(T: Trajectory, samples: int = 16) -> float:
    """Lower bound on the packedness of ``T``.

    Candidate balls are centred at vertices and edge midpoints; radii are the
    distances from each centre to ``samples`` evenly spaced arc-length
    quantiles. Every value returned is an attained ratio ``|T ∩ B| / r``, so
    it never exceeds the true packedness.
    """
    return packedness_witness(T, samples)[0]


def as_trajectory(obj) -> Trajectory:
    return obj if isinstance(obj, Trajectory) else Trajectory(obj)


def polyline_from(points: Iterable[Sequence[float]]) -> Trajectory:
    return Trajectory(list(points))
