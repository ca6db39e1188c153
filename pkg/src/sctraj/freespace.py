"""Length-preserving simplified free space diagram.

A point ``(x, y)`` of ``[0, |P|] x [0, |Q|]`` is white when the images of
``P(x)`` and ``Q(y)`` under the simplification maps are within
``threshold = (1 + eps/2) d``. The axes keep measuring *source* arc length.

Inside an aggregated cell (one simplified segment of each curve) the
simplified positions ``(sP, sQ)`` are separable, strictly increasing,
piecewise-linear functions of ``(x, y)`` with one break per axis, so the
cell splits into four quadrants on which the displacement
``fP(P(x)) - fQ(Q(y))`` is affine. In ``(sP, sQ)`` coordinates the white set
of a cell is a single clipped ellipse, which is what every query below
works with before mapping back.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError
from .geom import TAU, Segment, Trajectory, line_stadium_interval, seg_seg_dist
from .simplify import SimplificationMap, simplification


@dataclass(frozen=True)
class FreeSpaceConfig:
    d: float
    eps: float
    eps_int: float = field(init=False)
    threshold: float = field(init=False)

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ParameterError(f"d must be positive, got {self.d}")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ParameterError(f"eps must be positive, got {self.eps}")
        object.__setattr__(self, "eps_int", self.eps / 8.0)
        object.__setattr__(self, "threshold", (1.0 + 4.0 * self.eps_int) * self.d)

    @property
    def mu(self) -> float:
        """Simplification radius."""
        return self.eps_int * self.d


class FreeInterval(NamedTuple):
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo <= self.hi


EMPTY = FreeInterval(math.inf, -math.inf)


class Side:
    """One simplified segment seen as a diagram axis piece.

    ``to_s`` maps local source arc length in ``[0, sub_len]`` to the
    position along the simplified segment, ``from_s`` inverts it.
    """

    __slots__ = ("index", "origin", "sub_len", "w", "uprime", "seg_len", "ux", "uy", "dx", "dy", "end")

    def __init__(self, M: SimplificationMap, k: int):
        pc = M.pieces[k]
        self.index = k
        self.origin = M.src_starts[k]
        self.end = M.src_starts[k + 1] if k + 1 < len(M.src_starts) else M.source.total_length
        self.sub_len = self.end - self.origin
        self.w = pc.w_arc
        self.uprime = pc.uprime_arc
        self.seg_len = pc.seg_len
        S = M.simplified
        self.ux, self.uy = S._xs[k], S._ys[k]
        self.dx = (S._xs[k + 1] - self.ux) / self.seg_len
        self.dy = (S._ys[k + 1] - self.uy) / self.seg_len

    def to_s(self, t: float) -> float:
        if t <= self.w:
            return self.uprime * t / self.w if self.w > 0 else 0.0
        rest = self.sub_len - self.w
        if rest <= 0:
            return self.seg_len
        return self.uprime + (self.seg_len - self.uprime) * (t - self.w) / rest

    def from_s(self, s: float) -> float:
        if s <= self.uprime:
            return self.w * s / self.uprime if self.uprime > 0 else 0.0
        rest = self.seg_len - self.uprime
        if rest <= 0:
            return self.sub_len
        return self.w + (self.sub_len - self.w) * (s - self.uprime) / rest

    def pieces(self) -> list[tuple[float, float, float, float]]:
        """Affine pieces ``(t0, t1, slope, offset)`` with ``s = slope * t + offset``."""
        out = []
        if self.w > 0:
            out.append((0.0, self.w, self.uprime / self.w, 0.0))
        rest = self.sub_len - self.w
        if rest > 0:
            k = (self.seg_len - self.uprime) / rest
            out.append((self.w, self.sub_len, k, self.uprime - k * self.w))
        return out

    def point(self, s: float) -> tuple[float, float]:
        return self.ux + self.dx * s, self.uy + self.dy * s


def _knots(sub_len, w, uprime, seg_len):
    ks, kt = [0.0], [0.0]
    for a, b in ((w, uprime), (sub_len, seg_len)):
        if a > ks[-1]:
            ks.append(a)
            kt.append(max(b, kt[-1]))
    if len(ks) == 1:
        ks.append(max(sub_len, 1e-300))
        kt.append(seg_len)
    return np.asarray(ks), np.asarray(kt)


def _interp3(x, kx, ky):
    """Row-wise linear interpolation through three non-decreasing knots (clamped)."""
    x = np.clip(x, kx[:, 0], kx[:, 2])
    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = np.where(kx[:, 1] > kx[:, 0], (ky[:, 1] - ky[:, 0]) / (kx[:, 1] - kx[:, 0]), 0.0)
        s2 = np.where(kx[:, 2] > kx[:, 1], (ky[:, 2] - ky[:, 1]) / (kx[:, 2] - kx[:, 1]), 0.0)
    return np.where(x <= kx[:, 1], ky[:, 0] + s1 * (x - kx[:, 0]), ky[:, 1] + s2 * (x - kx[:, 1]))


@dataclass(frozen=True)
class Quadrant:
    """Affine displacement ``h(x, y) = A @ (x, y) + c`` on one sub-rectangle (local coordinates)."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    A: np.ndarray
    c: np.ndarray


class CellGeometry:
    __slots__ = ("p", "q", "t", "rect", "_ax", "_ay")

    def __init__(self, p: Side, q: Side, threshold: float):
        self.p = p
        self.q = q
        self.t = threshold
        self.rect = (p.sub_len, q.sub_len)
        self._ax = p.ux - q.ux
        self._ay = p.uy - q.uy

    @property
    def quadrants(self) -> list[Quadrant]:
        out = []
        p, q = self.p, self.q
        for x0, x1, kp, bp in p.pieces():
            for y0, y1, kq, bq in q.pieces():
                A = np.array([[p.dx * kp, -q.dx * kq], [p.dy * kp, -q.dy * kq]])
                c = np.array([self._ax + p.dx * bp - q.dx * bq, self._ay + p.dy * bp - q.dy * bq])
                out.append(Quadrant((x0, x1), (y0, y1), A, c))
        return out

    def white_local(self, x: float, y: float) -> bool:
        sp, sq = self.p.to_s(x), self.q.to_s(y)
        hx = self._ax + self.p.dx * sp - self.q.dx * sq
        hy = self._ay + self.p.dy * sp - self.q.dy * sq
        return math.hypot(hx, hy) <= self.t * (1 + TAU)

    def q_range_at_sp(self, sp: float) -> tuple[float, float] | None:
        """White ``sQ`` interval for fixed ``sP`` (clipped to the segment)."""
        p, q = self.p, self.q
        px, py = p.ux + p.dx * sp, p.uy + p.dy * sp
        iv = line_stadium_interval(q.ux, q.uy, q.dx, q.dy, px, py, px, py, self.t)
        if iv is None:
            return None
        lo, hi = max(iv[0], 0.0), min(iv[1], q.seg_len)
        return (lo, hi) if lo <= hi else None

    def p_range_at_sq(self, sq: float) -> tuple[float, float] | None:
        p, q = self.p, self.q
        qx, qy = q.ux + q.dx * sq, q.uy + q.dy * sq
        iv = line_stadium_interval(p.ux, p.uy, p.dx, p.dy, qx, qy, qx, qy, self.t)
        if iv is None:
            return None
        lo, hi = max(iv[0], 0.0), min(iv[1], p.seg_len)
        return (lo, hi) if lo <= hi else None

    def nearest_sq(self, sp: float) -> float:
        """``sQ`` of the point of the ``Q`` segment closest to ``P(sp)``."""
        p, q = self.p, self.q
        px, py = p.ux + p.dx * sp - q.ux, p.uy + p.dy * sp - q.uy
        return min(max(px * q.dx + py * q.dy, 0.0), q.seg_len)

    def nearest_sp(self, sq: float) -> float:
        p, q = self.p, self.q
        qx, qy = q.ux + q.dx * sq - p.ux, q.uy + q.dy * sq - p.uy
        return min(max(qx * p.dx + qy * p.dy, 0.0), p.seg_len)

    def vertical(self, x: float) -> FreeInterval:
        """White local-``y`` interval on the vertical line at local ``x``."""
        x = min(max(x, 0.0), self.p.sub_len)
        r = self.q_range_at_sp(self.p.to_s(x))
        if r is None:
            return EMPTY
        q = self.q
        lo = 0.0 if r[0] <= 0.0 else q.from_s(r[0])
        hi = q.sub_len if r[1] >= q.seg_len else q.from_s(r[1])
        return FreeInterval(lo, hi)

    def horizontal(self, y: float) -> FreeInterval:
        y = min(max(y, 0.0), self.q.sub_len)
        r = self.p_range_at_sq(self.q.to_s(y))
        if r is None:
            return EMPTY
        p = self.p
        lo = 0.0 if r[0] <= 0.0 else p.from_s(r[0])
        hi = p.sub_len if r[1] >= p.seg_len else p.from_s(r[1])
        return FreeInterval(lo, hi)

    def sp_span(self) -> tuple[float, float] | None:
        """Range of ``sP`` having some white point in the cell."""
        p, q = self.p, self.q
        iv = line_stadium_interval(
            p.ux, p.uy, p.dx, p.dy, q.ux, q.uy, q.ux + q.dx * q.seg_len, q.uy + q.dy * q.seg_len, self.t
        )
        if iv is None:
            return None
        lo, hi = max(iv[0], 0.0), min(iv[1], p.seg_len)
        return (lo, hi) if lo <= hi else None

    def curves(self, x: np.ndarray):
        """Unclipped lower/upper free-space boundary over local ``x``.

        Returns ``(lo, hi, ok_lo, ok_hi)`` in local ``y``; ``ok_*`` marks
        where the curve exists and lies inside the cell.
        """
        p, q = self.p, self.q
        sp = np.interp(x, *_knots(p.sub_len, p.w, p.uprime, p.seg_len))
        rx = self._ax + p.dx * sp
        ry = self._ay + p.dy * sp
        proj = rx * q.dx + ry * q.dy
        perp = rx * q.dy - ry * q.dx
        disc = self.t * self.t - perp * perp
        ok = disc >= 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        ks, kt = _knots(q.sub_len, q.w, q.uprime, q.seg_len)
        out = []
        for sq in (proj - root, proj + root):
            inside = ok & (sq >= 0) & (sq <= q.seg_len)
            out.append((np.interp(sq, kt, ks), inside))
        return out[0][0], out[1][0], out[0][1], out[1][1]

    def sq_span(self) -> tuple[float, float] | None:
        p, q = self.p, self.q
        iv = line_stadium_interval(
            q.ux, q.uy, q.dx, q.dy, p.ux, p.uy, p.ux + p.dx * p.seg_len, p.uy + p.dy * p.seg_len, self.t
        )
        if iv is None:
            return None
        lo, hi = max(iv[0], 0.0), min(iv[1], q.seg_len)
        return (lo, hi) if lo <= hi else None


class AggregatedCell:
    __slots__ = ("row", "col", "geometry", "origin", "x1", "y1", "_ext", "_yspan")

    def __init__(self, row: int, col: int, geometry: CellGeometry):
        self.row = row
        self.col = col
        self.geometry = geometry
        self.origin = (geometry.p.origin, geometry.q.origin)
        self.x1 = geometry.p.end
        self.y1 = geometry.q.end
        self._ext = None
        self._yspan = None

    def __repr__(self) -> str:
        return f"AggregatedCell(row={self.row}, col={self.col})"

    @property
    def x0(self) -> float:
        return self.origin[0]

    @property
    def y0(self) -> float:
        return self.origin[1]

    def white(self, x: float, y: float) -> bool:
        return self.geometry.white_local(x - self.origin[0], y - self.origin[1])

    def vertical(self, x: float) -> FreeInterval:
        iv = self.geometry.vertical(x - self.origin[0])
        if iv.empty:
            return iv
        y0 = self.origin[1]
        lo = y0 if iv.lo <= 0.0 else y0 + iv.lo
        hi = self.y1 if iv.hi >= self.geometry.q.sub_len else y0 + iv.hi
        return FreeInterval(lo, hi)

    def horizontal(self, y: float) -> FreeInterval:
        iv = self.geometry.horizontal(y - self.origin[1])
        if iv.empty:
            return iv
        x0 = self.origin[0]
        lo = x0 if iv.lo <= 0.0 else x0 + iv.lo
        hi = self.x1 if iv.hi >= self.geometry.p.sub_len else x0 + iv.hi
        return FreeInterval(lo, hi)

    def extremes(self):
        if self._ext is None:
            self._ext = cell_extremes(self)
        return self._ext

    def y_span(self) -> tuple[float, float]:
        if self._yspan is None:
            e = self.extremes()
            self._yspan = (e[2][1], e[3][1])
        return self._yspan


def _global_x(g: CellGeometry, origin: float, s: float) -> float:
    if s <= 0.0:
        return origin
    if s >= g.p.seg_len:
        return g.p.end
    return origin + g.p.from_s(s)


def _global_y(g: CellGeometry, origin: float, s: float) -> float:
    if s <= 0.0:
        return origin
    if s >= g.q.seg_len:
        return g.q.end
    return origin + g.q.from_s(s)


def cell_extremes(cell: AggregatedCell):
    """``(leftmost, rightmost, lowest, highest)`` white points of a non-empty cell.

    The position maps are monotone per axis, so extremes in source
    coordinates are the images of the ellipse extremes in simplified
    coordinates. Ties are broken lexicographically: leftmost and lowest take
    the smaller other coordinate, rightmost and highest the larger.
    """
    g = cell.geometry
    x0, y0 = cell.origin
    sp = g.sp_span()
    sq = g.sq_span()
    if sp is None or sq is None:
        raise ParameterError(f"{cell!r} has no white point")
    out = []
    # at a tangent extreme the range is one point and round-off may lose it;
    # that point is then the nearest point on the other segment
    for k, s in enumerate(sp):
        r = g.q_range_at_sp(s)
        y = r[k] if r is not None else g.nearest_sq(s)
        out.append((_global_x(g, x0, s), _global_y(g, y0, y)))
    for k, s in enumerate(sq):
        r = g.p_range_at_sq(s)
        x = r[k] if r is not None else g.nearest_sp(s)
        out.append((_global_x(g, x0, x), _global_y(g, y0, s)))
    return tuple(out)


def build_cell(P_map: SimplificationMap, Q_map: SimplificationMap, col: int, row: int, cfg: FreeSpaceConfig,
               _sides=None) -> CellGeometry | None:
    """Geometry of the aggregated cell ``(row, col)`` or ``None`` when it has no white point.

    The cell is non-empty exactly when the two simplified segments come
    within ``cfg.threshold`` of each other.
    """
    if _sides is not None:
        p, q = _sides
    else:
        p, q = Side(P_map, col), Side(Q_map, row)
    a0 = (p.ux, p.uy)
    a1 = (p.ux + p.dx * p.seg_len, p.uy + p.dy * p.seg_len)
    b0 = (q.ux, q.uy)
    b1 = (q.ux + q.dx * q.seg_len, q.uy + q.dy * q.seg_len)
    if seg_seg_dist(a0, a1, b0, b1) > cfg.threshold:
        return None
    return CellGeometry(p, q, cfg.threshold)


def _segment_grid_cells(ax, ay, bx, by, h):
    """Grid cells (side ``h``) met by the closed segment ``ab``."""
    ix0, ix1 = sorted((math.floor(ax / h), math.floor(bx / h)))
    out = []
    if ix0 == ix1:
        j0, j1 = sorted((math.floor(ay / h), math.floor(by / h)))
        return [(ix0, j) for j in range(j0, j1 + 1)]
    for i in range(ix0, ix1 + 1):
        xl = max(i * h, min(ax, bx))
        xr = min((i + 1) * h, max(ax, bx))
        ya = ay + (by - ay) * (xl - ax) / (bx - ax)
        yb = ay + (by - ay) * (xr - ax) / (bx - ax)
        j0, j1 = sorted((math.floor(ya / h), math.floor(yb / h)))
        out.extend((i, j) for j in range(j0, j1 + 1))
    return out


def _coords(seg):
    if isinstance(seg, Segment):
        return seg.start.x, seg.start.y, seg.end.x, seg.end.y
    (ax, ay), (bx, by) = seg
    return float(ax), float(ay), float(bx), float(by)


def near_segment_pairs(Psegs: Sequence, Qsegs: Sequence, r: float) -> set[tuple[int, int]]:
    """All index pairs ``(i, j)`` with ``dist(Psegs[i], Qsegs[j]) <= r``.

    Segments are rasterised into a uniform grid of side ``h >= r`` (the
    median segment length when that is larger, so long segments stay cheap);
    two segments within ``r`` of each other occupy grid cells at most one
    step apart, so only 3x3 neighbourhoods are inspected and every candidate
    is verified.
    """
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    grid: dict[tuple[int, int], list[int]] = {}
    P = [_coords(s) for s in Psegs]
    Q = [_coords(s) for s in Qsegs]
    lens = [math.hypot(c[2] - c[0], c[3] - c[1]) for c in P + Q]
    h = max(r, float(np.median(lens))) if lens else r
    for i, (ax, ay, bx, by) in enumerate(P):
        for key in _segment_grid_cells(ax, ay, bx, by, h):
            grid.setdefault(key, []).append(i)
    out = set()
    for j, (bx0, by0, bx1, by1) in enumerate(Q):
        seen = set()
        for ci, cj in _segment_grid_cells(bx0, by0, bx1, by1, h):
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    for i in grid.get((ci + di, cj + dj), ()):
                        if i not in seen:
                            seen.add(i)
                            ax, ay, ax1, ay1 = P[i]
                            if seg_seg_dist((ax, ay), (ax1, ay1), (bx0, by0), (bx1, by1)) <= r:
                                out.add((i, j))
    return out


class FreeSpaceDiagram:
    """Sparse set of non-empty aggregated cells with neighbour links.

    ``cells`` maps ``(row, col)`` to :class:`AggregatedCell`; rows index
    simplified segments of ``Q``, columns those of ``P``. ``xs`` / ``ys`` are
    the cell boundaries in source arc length.
    """

    def __init__(self, config: FreeSpaceConfig, P_map: SimplificationMap, Q_map: SimplificationMap,
                 cells: dict[tuple[int, int], AggregatedCell]):
        self.config = config
        self.P_map = P_map
        self.Q_map = Q_map
        self.xs = list(P_map.src_starts)
        self.ys = list(Q_map.src_starts)
        self.width = P_map.source.total_length
        self.height = Q_map.source.total_length
        self.cells = cells
        self.by_row: dict[int, list[int]] = {}
        self.by_col: dict[int, list[int]] = {}
        for r, c in sorted(cells):
            self.by_row.setdefault(r, []).append(c)
        for r, c in sorted(cells, key=lambda k: (k[1], k[0])):
            self.by_col.setdefault(c, []).append(r)
        self.sorted_by_row = sorted(cells)
        self.sorted_by_col = sorted(cells, key=lambda k: (k[1], k[0]))
        self._vcache: dict = {}
        self._hcache: dict = {}
        self._table: dict | None = None
        self.neighbors: dict[tuple[int, int], dict[str, tuple[int, int] | None]] = {}
        for r, cols in self.by_row.items():
            for i, c in enumerate(cols):
                self.neighbors.setdefault((r, c), {})["left"] = (r, cols[i - 1]) if i > 0 else None
                self.neighbors[(r, c)]["right"] = (r, cols[i + 1]) if i + 1 < len(cols) else None
        for c, rows in self.by_col.items():
            for i, r in enumerate(rows):
                self.neighbors[(r, c)]["down"] = (rows[i - 1], c) if i > 0 else None
                self.neighbors[(r, c)]["up"] = (rows[i + 1], c) if i + 1 < len(rows) else None

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return self.P_map.k

    @property
    def n_rows(self) -> int:
        return self.Q_map.k

    @property
    def x_bounds(self) -> list[float]:
        return self.xs + [self.width]

    @property
    def y_bounds(self) -> list[float]:
        return self.ys + [self.height]

    def col_of(self, x: float) -> int:
        return min(max(bisect_right(self.xs, x) - 1, 0), self.n_cols - 1)

    def row_of(self, y: float) -> int:
        return min(max(bisect_right(self.ys, y) - 1, 0), self.n_rows - 1)

    def cell_at(self, x: float, y: float) -> AggregatedCell | None:
        """Cell whose half-open rectangle holds ``(x, y)`` (closed on the far edges)."""
        return self.cells.get((self.row_of(y), self.col_of(x)))

    def col_x(self, c: int) -> float:
        return self.xs[c] if c < len(self.xs) else self.width

    def row_y(self, r: int) -> float:
        return self.ys[r] if r < len(self.ys) else self.height

    @property
    def white_tolerance(self) -> float:
        # relative slack plus an absolute term for arc-length cancellation
        return self.config.threshold * TAU + 1e-11 * max(1.0, self.width, self.height)

    def is_white(self, x: float, y: float) -> bool:
        px, py = self.P_map.mapped_point(x)
        qx, qy = self.Q_map.mapped_point(y)
        return math.hypot(px - qx, py - qy) <= self.config.threshold + self.white_tolerance

    def distances(self, xs, ys) -> np.ndarray:
        """Vectorised ``dist(fP(P(x)), fQ(Q(y)))``."""
        a = self.P_map.simplified.points_at(self.P_map.map_many(xs))
        b = self.Q_map.simplified.points_at(self.Q_map.map_many(ys))
        return np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])

    def is_white_many(self, xs, ys) -> np.ndarray:
        return self.distances(xs, ys) <= self.config.threshold + self.white_tolerance

    def vertical_interval(self, row: int, x: float) -> FreeInterval:
        """White interval on the vertical line ``x`` inside row ``row``."""
        c = self.col_of(x)
        cell = self.cells.get((row, c))
        if cell is None and c > 0 and x == self.xs[c]:
            cell = self.cells.get((row, c - 1))
        return cell.vertical(x) if cell is not None else EMPTY

    def horizontal_interval(self, col: int, y: float) -> FreeInterval:
        r = self.row_of(y)
        cell = self.cells.get((r, col))
        if cell is None and r > 0 and y == self.ys[r]:
            cell = self.cells.get((r - 1, col))
        return cell.horizontal(y) if cell is not None else EMPTY

    def boundary_v(self, row: int, b: int) -> FreeInterval:
        """White interval on vertical boundary ``b`` inside ``row``.

        Taken from the cell on the left when it exists, so every consumer
        sees the same floats for a shared boundary.
        """
        key = (row, b)
        iv = self._vcache.get(key)
        if iv is None:
            cell = self.cells.get((row, b - 1)) or self.cells.get((row, b))
            iv = cell.vertical(self.col_x(b)) if cell is not None else EMPTY
            self._vcache[key] = iv
        return iv

    def boundary_h(self, col: int, rb: int) -> FreeInterval:
        """White interval on horizontal boundary ``rb`` inside ``col`` (lower cell first)."""
        key = (col, rb)
        iv = self._hcache.get(key)
        if iv is None:
            cell = self.cells.get((rb - 1, col)) or self.cells.get((rb, col))
            iv = cell.horizontal(self.row_y(rb)) if cell is not None else EMPTY
            self._hcache[key] = iv
        return iv

    def _cell_table(self) -> dict:
        """Per-cell parameters as flat arrays, for vectorised line queries."""
        if self._table is None:
            cells = list(self.cells.values())

            def knots3(side):
                ks, kt = _knots(side.sub_len, side.w, side.uprime, side.seg_len)
                if len(ks) == 2:
                    ks, kt = np.append(ks, ks[-1]), np.append(kt, kt[-1])
                return ks, kt

            pk = [knots3(c.geometry.p) for c in cells]
            qk = [knots3(c.geometry.q) for c in cells]
            self._table = {
                "col": np.array([c.col for c in cells], dtype=int),
                "x0": np.array([c.x0 for c in cells]),
                "y0": np.array([c.y0 for c in cells]),
                "ax": np.array([c.geometry._ax for c in cells]),
                "ay": np.array([c.geometry._ay for c in cells]),
                "pdx": np.array([c.geometry.p.dx for c in cells]),
                "pdy": np.array([c.geometry.p.dy for c in cells]),
                "qdx": np.array([c.geometry.q.dx for c in cells]),
                "qdy": np.array([c.geometry.q.dy for c in cells]),
                "qlen": np.array([c.geometry.q.seg_len for c in cells]),
                "t": np.array([c.geometry.t for c in cells]),
                "pks": np.array([k[0] for k in pk]).reshape(-1, 3),
                "pkt": np.array([k[1] for k in pk]).reshape(-1, 3),
                "qks": np.array([k[0] for k in qk]).reshape(-1, 3),
                "qkt": np.array([k[1] for k in qk]).reshape(-1, 3),
            }
        return self._table

    def line_extents(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Lowest and highest white ``y`` on each vertical line ``x`` (``inf`` / ``-inf`` if none)."""
        xs = np.asarray(xs, dtype=float)
        lo = np.full(xs.shape, math.inf)
        hi = np.full(xs.shape, -math.inf)
        if xs.size == 0 or not self.cells:
            return lo, hi
        T = self._cell_table()
        order = np.argsort(xs)
        sx = xs[order]
        bounds = np.asarray(self.x_bounds)
        i0 = np.searchsorted(sx, bounds[T["col"]], "left")
        i1 = np.searchsorted(sx, bounds[T["col"] + 1], "right")
        cnt = np.maximum(i1 - i0, 0)
        if cnt.sum() == 0:
            return lo, hi
        ci = np.repeat(np.arange(len(cnt)), cnt)
        first = np.cumsum(cnt) - cnt
        pos = i0[ci] + np.arange(ci.size) - first[ci]
        idx = order[pos]
        sp = _interp3(sx[pos] - T["x0"][ci], T["pks"][ci], T["pkt"][ci])
        rx = T["ax"][ci] + T["pdx"][ci] * sp
        ry = T["ay"][ci] + T["pdy"][ci] * sp
        qdx, qdy = T["qdx"][ci], T["qdy"][ci]
        proj = rx * qdx + ry * qdy
        perp = rx * qdy - ry * qdx
        t = T["t"][ci]
        disc = t * t - perp * perp
        ok = disc >= 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        a = np.maximum(proj - root, 0.0)
        b = np.minimum(proj + root, T["qlen"][ci])
        ok &= a <= b
        ya = T["y0"][ci] + _interp3(a, T["qkt"][ci], T["qks"][ci])
        yb = T["y0"][ci] + _interp3(b, T["qkt"][ci], T["qks"][ci])
        np.minimum.at(lo, idx[ok], ya[ok])
        np.maximum.at(hi, idx[ok], yb[ok])
        return lo, hi

    def line_intervals(self, x: float) -> list[FreeInterval]:
        """White intervals of the full vertical line at ``x``, bottom to top, touching ones merged."""
        c = self.col_of(x)
        out: list[FreeInterval] = []
        cols = [c]
        if c > 0 and x == self.xs[c]:
            cols.append(c - 1)
        rows = sorted({r for cc in cols for r in self.by_col.get(cc, ())})
        for r in rows:
            iv = EMPTY
            for cc in cols:
                cell = self.cells.get((r, cc))
                if cell is not None:
                    iv = cell.vertical(x)
                    if not iv.empty:
                        break
            if iv.empty:
                continue
            if out and iv.lo <= out[-1].hi:
                out[-1] = FreeInterval(out[-1].lo, max(out[-1].hi, iv.hi))
            else:
                out.append(iv)
        return out


def boundary_free_interval(cell: AggregatedCell, line: tuple[str, float]) -> FreeInterval:
    """White part of ``cell`` on a vertical (``("v", x)``) or horizontal (``("h", y)``) line."""
    kind, v = line
    if kind == "v":
        if not cell.x0 - TAU * max(1.0, abs(cell.x1)) <= v <= cell.x1 + TAU * max(1.0, abs(cell.x1)):
            raise ParameterError(f"vertical line x={v} misses {cell!r}")
        return cell.vertical(v)
    if kind == "h":
        if not cell.y0 - TAU * max(1.0, abs(cell.y1)) <= v <= cell.y1 + TAU * max(1.0, abs(cell.y1)):
            raise ParameterError(f"horizontal line y={v} misses {cell!r}")
        return cell.horizontal(v)
    raise ParameterError(f"unknown line kind {kind!r}")


RESOLUTION = 1e-7


def min_resolvable_d(P: Trajectory, Q: Trajectory) -> float:
    """Smallest ``d`` whose white-interval endpoints stay accurate in double precision."""
    scale = max(1.0, P.total_length, Q.total_length,
                float(np.abs(P.vertices).max()), float(np.abs(Q.vertices).max()))
    return RESOLUTION * scale


def build_diagram(P: Trajectory, Q: Trajectory, cfg: FreeSpaceConfig, timings: dict | None = None,
                  maps: tuple[SimplificationMap, SimplificationMap] | None = None) -> FreeSpaceDiagram:
    """Simplify, find near segment pairs, build cells, sort and link them."""
    import time

    floor = min_resolvable_d(P, Q)
    if cfg.d < floor:
        raise ParameterError(f"d={cfg.d} is below the numerical resolution {floor:.3g} for these inputs")
    t0 = time.perf_counter()
    if maps is not None:
        P_map, Q_map = maps
    else:
        P_map = simplification(P, cfg.mu)
        Q_map = P_map if Q is P else simplification(Q, cfg.mu)
    t1 = time.perf_counter()
    Ps, Qs = P_map.simplified, Q_map.simplified
    psegs = [((Ps._xs[i], Ps._ys[i]), (Ps._xs[i + 1], Ps._ys[i + 1])) for i in range(Ps.n - 1)]
    qsegs = psegs if Qs is Ps else [((Qs._xs[i], Qs._ys[i]), (Qs._xs[i + 1], Qs._ys[i + 1])) for i in range(Qs.n - 1)]
    pairs = near_segment_pairs(psegs, qsegs, cfg.threshold)
    t2 = time.perf_counter()
    pside = [Side(P_map, k) for k in range(P_map.k)]
    qside = pside if Q_map is P_map else [Side(Q_map, k) for k in range(Q_map.k)]
    cells = {}
    for col, row in pairs:
        g = build_cell(P_map, Q_map, col, row, cfg, _sides=(pside[col], qside[row]))
        if g is not None:
            cells[(row, col)] = AggregatedCell(row, col, g)
    fsd = FreeSpaceDiagram(cfg, P_map, Q_map, cells)
    t3 = time.perf_counter()
    if timings is not None:
        timings["simplify"] = timings.get("simplify", 0.0) + (t1 - t0)
        timings["near_pairs"] = timings.get("near_pairs", 0.0) + (t2 - t1)
        timings["cells"] = timings.get("cells", 0.0) + (t3 - t2)
    return fsd
