"""Greedy ball simplification and the piecewise-uniform map onto it.

The map sends each subcurve ``P_uv`` (the source stretch replaced by the
simplified segment ``uv``) onto ``uv`` in two uniform pieces, split where
the subcurve first leaves the ball ``B(u, mu)``. It is continuous, strictly
increasing in arc length, and moves no point by more than ``2 * mu``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geom import TAU, Ball, Trajectory, ball_exit_point


@dataclass(frozen=True)
class SimplifiedCurve:
    source: Trajectory
    mu: float
    simplified_vertices: tuple[int, ...]
    simplified_trajectory: Trajectory
    short_final: bool

    @property
    def k(self) -> int:
        """Number of simplified segments."""
        return len(self.simplified_vertices) - 1


@dataclass(frozen=True)
class PieceMap:
    seg_index: int
    w_arc: float
    uprime_arc: float
    sub_len: float
    seg_len: float


def simplify_curve(T: Trajectory, mu: float) -> SimplifiedCurve:
    """Greedy ``mu``-simplification.

    Starting from the first vertex, walk forward until a vertex is at
    distance ``>= mu`` from the last kept vertex (or the walk reaches the
    final vertex) and keep it.
    """
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    xs, ys = T._xs, T._ys
    n = T.n
    keep = [0]
    i = 0
    limit = mu * (1 - TAU)
    while i < n - 1:
        qx, qy = xs[i], ys[i]
        j = i + 1
        while j < n - 1 and math.hypot(xs[j] - qx, ys[j] - qy) < limit:
            j += 1
        keep.append(j)
        i = j
    if len(keep) > 2 and xs[keep[-1]] == xs[keep[-2]] and ys[keep[-1]] == ys[keep[-2]]:
        # tail returned exactly onto the previous kept vertex
        del keep[-2]
    traj = Trajectory(T.vertices[keep])
    last = keep[-1]
    prev = keep[-2]
    short = math.hypot(xs[last] - xs[prev], ys[last] - ys[prev]) < limit
    return SimplifiedCurve(T, float(mu), tuple(keep), traj, short)


class SimplificationMap:
    """The map ``f`` from source arc length to simplified arc length.

    ``knots_src`` / ``knots_simp`` are the breakpoints of the piecewise
    linear map; ``src_starts`` / ``simp_starts`` are the arc lengths of the
    kept vertices on the source and on the simplification.
    """

    def __init__(self, curve: SimplifiedCurve, pieces: list[PieceMap]):
        self.curve = curve
        self.pieces = pieces
        src = curve.source
        self.src_starts = [src._pre[i] for i in curve.simplified_vertices]
        self.simp_starts = list(curve.simplified_trajectory._pre)
        ks, kt = [0.0], [0.0]
        for pc, a, b in zip(pieces, self.src_starts, self.simp_starts):
            for u, v in ((a + pc.w_arc, b + pc.uprime_arc), (a + pc.sub_len, b + pc.seg_len)):
                if u > ks[-1]:
                    ks.append(u)
                    kt.append(max(v, kt[-1]))
        ks[-1] = src.total_length
        kt[-1] = curve.simplified_trajectory.total_length
        self.knots_src = ks
        self.knots_simp = kt
        self._ks = np.asarray(ks)
        self._kt = np.asarray(kt)
        self.source_breakpoints = tuple(ks)

    @property
    def source(self) -> Trajectory:
        return self.curve.source

    @property
    def simplified(self) -> Trajectory:
        return self.curve.simplified_trajectory

    @property
    def k(self) -> int:
        return self.curve.k

    def __call__(self, x: float) -> float:
        return map_param(self, x)

    def _eval(self, x: float) -> float:
        ks, kt = self.knots_src, self.knots_simp
        i = bisect_right(ks, x) - 1
        if i >= len(ks) - 1:
            return kt[-1]
        if i < 0:
            return kt[0]
        return kt[i] + (kt[i + 1] - kt[i]) * (x - ks[i]) / (ks[i + 1] - ks[i])

    def inverse(self, y: float) -> float:
        """Source arc length mapped to simplified arc length ``y``."""
        ks, kt = self.knots_src, self.knots_simp
        i = bisect_right(kt, y) - 1
        if i >= len(kt) - 1:
            return ks[-1]
        if i < 0:
            return ks[0]
        while kt[i + 1] == kt[i] and i + 1 < len(kt) - 1:
            i += 1
        den = kt[i + 1] - kt[i]
        if den == 0.0:
            return ks[i]
        return ks[i] + (ks[i + 1] - ks[i]) * (y - kt[i]) / den

    def map_many(self, xs) -> np.ndarray:
        return np.interp(np.asarray(xs, dtype=float), self._ks, self._kt)

    def inverse_many(self, ys) -> np.ndarray:
        return np.interp(np.asarray(ys, dtype=float), self._kt, self._ks)

    def segment_of(self, x: float) -> int:
        """Simplified segment whose source stretch contains ``x`` (half-open, last closed)."""
        i = bisect_right(self.src_starts, x) - 1
        return min(max(i, 0), self.k - 1)

    def mapped_point(self, x: float):
        return self.simplified.point_at(self._eval(x))


def build_map(S: SimplifiedCurve) -> SimplificationMap:
    src = S.source
    pieces = []
    for k in range(S.k):
        i, j = S.simplified_vertices[k], S.simplified_vertices[k + 1]
        sub_len = src._pre[j] - src._pre[i]
        seg_len = S.simplified_trajectory._pre[k + 1] - S.simplified_trajectory._pre[k]
        if k == S.k - 1 and S.short_final:
            pieces.append(PieceMap(k, sub_len / 2, seg_len / 2, sub_len, seg_len))
            continue
        uprime = S.mu
        exit_x = ball_exit_point(src, src._pre[i], Ball(src.vertex(i), S.mu))
        w_arc = min(exit_x - src._pre[i], sub_len)
        if seg_len - uprime <= TAU * seg_len or sub_len - w_arc <= TAU * sub_len:
            # v sits on the ball boundary: second piece collapses onto v
            uprime, w_arc = seg_len, sub_len
        pieces.append(PieceMap(k, w_arc, uprime, sub_len, seg_len))
    return SimplificationMap(S, pieces)


def map_param(M: SimplificationMap, x: float) -> float:
    L = M.source.total_length
    if math.isnan(x) or x < -TAU * L or x > L * (1 + TAU):
        raise ParameterError(f"arc length {x} outside [0, {L}]")
    return M._eval(min(max(x, 0.0), L))


def simplification(T: Trajectory, mu: float) -> SimplificationMap:
    """Convenience: :func:`simplify_curve` followed by :func:`build_map`."""
    return build_map(simplify_curve(T, mu))
