"""Critical points and the graph of basic monotone paths.

Points are stored once per position. Every point node carries two kinds of
outgoing edges:

* *range edges*: from a point on a vertical cell boundary to the canonical
  range-tree nodes covering the top critical points of its row that it
  can reach (and the column-transposed analogue);
* *chain edges*: from a point to the lowest reachable point on the right
  boundary of its cell and the leftmost reachable point on the top
  boundary. These create new (propagated) nodes on demand.

Both edge kinds are genuine monotone paths. Chain edges alone already make
reachability exact, since any monotone path leaves a convex cell through
its right or top boundary at a point the chain node dominates.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Hashable

from .errors import ParameterError
from .freespace import EMPTY, FreeInterval, FreeSpaceDiagram
from .geom import TAU
from .structures import BOTTOM, BlockTree, LinkCutForest, RangeTree

BOUNDARY = "boundary"
GREEDY = "greedy"
PROPAGATED = "propagated"


@dataclass(frozen=True)
class CriticalPoint:
    position: tuple[float, float]
    location: tuple[int, int, str]
    kind: str = BOUNDARY

    @property
    def x(self) -> float:
        return self.position[0]

    @property
    def y(self) -> float:
        return self.position[1]


def extract_boundary_critical_points(fsd: FreeSpaceDiagram) -> list[CriticalPoint]:
    """Endpoints of the white interval on every cell boundary, deduplicated, sorted by ``(x, y)``."""
    seen: dict[tuple[float, float], CriticalPoint] = {}
    for (r, c) in fsd.sorted_by_row:
        for b, side in ((c, "left"), (c + 1, "right")):
            iv = fsd.boundary_v(r, b)
            if not iv.empty:
                x = fsd.col_x(b)
                for y in (iv.lo, iv.hi):
                    seen.setdefault((x, y), CriticalPoint((x, y), (r, c, side)))
        for rb, side in ((r, "bottom"), (r + 1, "top")):
            iv = fsd.boundary_h(c, rb)
            if not iv.empty:
                y = fsd.row_y(rb)
                for x in (iv.lo, iv.hi):
                    seen.setdefault((x, y), CriticalPoint((x, y), (r, c, side)))
    return sorted(seen.values(), key=lambda p: p.position)


class Strip:
    """One row, or one column seen transposed, in ``(along, across)`` coordinates.

    For a row ``along`` is ``x`` and the far boundary is the top; for a
    column ``along`` is ``y`` and the far boundary is the right side.
    """

    def __init__(self, index: int, bpos, bottom, top, gap, far_a, far_ids):
        self.index = index
        self.bpos = bpos
        self.bottom = bottom
        self.top = top
        self.gap = gap
        self.block = BlockTree(bottom, top)
        self.far_a = far_a
        self.far_ids = far_ids
        self.tree = RangeTree(far_a)
        self.q: list[int | None] = [None] * len(bpos)
        for j in range(len(bpos) - 1, -1, -1):
            if not gap[j]:
                self.q[j] = self.rightmost(bpos[j], bottom[j])

    def rightmost(self, a: float, b: float) -> int | None:
        """Index of the farthest far-boundary critical point reachable from ``(a, b)``."""
        j0 = bisect_right(self.bpos, a) - 1
        while True:
            hit = self.block.first_blocker(j0 + 1, b)
            if hit is None:
                limit = math.inf
                break
            j, kind = hit
            if self.gap[j]:
                limit = self.bpos[j]
                break
            if kind == BOTTOM:
                if self.q[j] is not None:
                    return self.q[j]
                limit = self.bpos[j]
                break
            if b == self.top[j]:
                j0 = j
                continue
            limit = self.bpos[j]
            break
        k = bisect_right(self.far_a, limit) - 1
        if k >= 0 and self.far_a[k] >= a:
            return k
        return None

    def cover(self, a: float, k: int) -> list[int]:
        return self.tree.cover_indices(bisect_left(self.far_a, a), k + 1)


class ReachabilityGraph:
    """Point nodes (by integer id) plus range-tree vertices ``("r"|"c", strip, node)``."""

    def __init__(self, fsd: FreeSpaceDiagram):
        self.fsd = fsd
        self.xs: list[float] = []
        self.ys: list[float] = []
        self.kinds: list[str] = []
        self.ids: dict[tuple[float, float], int] = {}
        self._succ: dict[int, list] = {}
        self.row_strips: dict[int, Strip] = {}
        self.col_strips: dict[int, Strip] = {}
        self.edge_count = 0

    def __len__(self) -> int:
        return len(self.ids)

    def node(self, pos: tuple[float, float], kind: str = PROPAGATED) -> int:
        k = self.ids.get(pos)
        if k is None:
            k = len(self.xs)
            self.ids[pos] = k
            self.xs.append(pos[0])
            self.ys.append(pos[1])
            self.kinds.append(kind)
        return k

    def position(self, k: int) -> tuple[float, float]:
        return self.xs[k], self.ys[k]

    def home(self, k: int) -> tuple[int, int]:
        return self.fsd.row_of(self.ys[k]), self.fsd.col_of(self.xs[k])

    def successors(self, k: int) -> list:
        out = self._succ.get(k)
        if out is None:
            out = self._expand(k)
            self._succ[k] = out
            self.edge_count += len(out)
        return out

    def cell_of(self, k: int):
        """``(row, col, cell)`` for the home cell, falling back to a neighbour sharing the point."""
        fsd = self.fsd
        x, y = self.xs[k], self.ys[k]
        r, c = self.home(k)
        cell = fsd.cells.get((r, c))
        if cell is None:
            for rr, cc in ((r, c - 1), (r - 1, c), (r - 1, c - 1)):
                if (cc == c or x == fsd.col_x(c)) and (rr == r or y == fsd.row_y(r)):
                    cell = fsd.cells.get((rr, cc))
                    if cell is not None:
                        return rr, cc, cell
        return r, c, cell

    def _expand(self, k: int) -> list:
        fsd = self.fsd
        x, y = self.xs[k], self.ys[k]
        r, c, cell = self.cell_of(k)
        out: list = []
        if cell is None:
            return out
        if x < cell.x1:
            iv = fsd.boundary_v(r, c + 1)
            if not iv.empty:
                yy = max(y, iv.lo)
                if yy <= iv.hi:
                    out.append(self.node((cell.x1, yy)))
        if y < cell.y1:
            iv = fsd.boundary_h(c, r + 1)
            if not iv.empty:
                xx = max(x, iv.lo)
                if xx <= iv.hi:
                    out.append(self.node((xx, cell.y1)))
        # degenerate moves along the boundary line the point sits on
        if y == cell.y0 or y == cell.y1:
            iv = fsd.boundary_h(c, r if y == cell.y0 else r + 1)
            if not iv.empty and iv.lo <= x < iv.hi:
                out.append(self.node((iv.hi, y)))
        if x == cell.x0 or x == cell.x1:
            iv = fsd.boundary_v(r, c if x == cell.x0 else c + 1)
            if not iv.empty and iv.lo <= y < iv.hi:
                out.append(self.node((x, iv.hi)))
        greedy = self.kinds[k] == GREEDY
        if (greedy or x == fsd.col_x(c)) and y < cell.y1:
            st = self.row_strips.get(r)
            if st is not None:
                q = st.rightmost(x, y)
                if q is not None:
                    out.extend(("r", r, v) for v in st.cover(x, q))
        if (greedy or y == fsd.row_y(r)) and x < cell.x1:
            st = self.col_strips.get(c)
            if st is not None:
                q = st.rightmost(y, x)
                if q is not None:
                    out.extend(("c", c, v) for v in st.cover(y, q))
        return out

    def range_children(self, v: tuple) -> list:
        kind, s, node = v
        st = self.row_strips[s] if kind == "r" else self.col_strips[s]
        t = st.tree
        if t.left[node] < 0:
            return [st.far_ids[t.lo[node]]]
        return [(kind, s, t.left[node]), (kind, s, t.right[node])]

    def leaves(self, v) -> list[int]:
        """Point nodes under a graph vertex (itself for a point)."""
        if isinstance(v, int):
            return [v]
        kind, s, node = v
        st = self.row_strips[s] if kind == "r" else self.col_strips[s]
        lo, hi = st.tree.span(node)
        return st.far_ids[lo:hi]

    def remove(self, k: int) -> None:
        """Drop a greedy node so its position can be reused."""
        if self.kinds[k] != GREEDY:
            raise ParameterError(f"node {k} is not a greedy point")
        pos = (self.xs[k], self.ys[k])
        if self.ids.get(pos) == k:
            del self.ids[pos]
        self._succ.pop(k, None)


def _row_strip(fsd: FreeSpaceDiagram, g: ReachabilityGraph, r: int) -> Strip:
    cols = fsd.by_row[r]
    bcols = sorted(set(cols) | {c + 1 for c in cols})
    bpos, bottom, top, gap = [], [], [], []
    for b in bcols:
        iv = fsd.boundary_v(r, b)
        blocked = (r, b - 1) not in fsd.cells or iv.empty
        bpos.append(fsd.col_x(b))
        gap.append(blocked)
        bottom.append(math.inf if blocked else iv.lo)
        top.append(math.inf if blocked else iv.hi)
    y1 = fsd.row_y(r + 1)
    far = {}
    for c in cols:
        iv = fsd.boundary_h(c, r + 1)
        if not iv.empty:
            for x in (iv.lo, iv.hi):
                far.setdefault(x, g.node((x, y1), BOUNDARY))
    far_a = sorted(far)
    return Strip(r, bpos, bottom, top, gap, far_a, [far[a] for a in far_a])


def _col_strip(fsd: FreeSpaceDiagram, g: ReachabilityGraph, c: int) -> Strip:
    rows = fsd.by_col[c]
    brows = sorted(set(rows) | {r + 1 for r in rows})
    bpos, bottom, top, gap = [], [], [], []
    for rb in brows:
        iv = fsd.boundary_h(c, rb)
        blocked = (rb - 1, c) not in fsd.cells or iv.empty
        bpos.append(fsd.row_y(rb))
        gap.append(blocked)
        bottom.append(math.inf if blocked else iv.lo)
        top.append(math.inf if blocked else iv.hi)
    x1 = fsd.col_x(c + 1)
    far = {}
    for r in rows:
        iv = fsd.boundary_v(r, c + 1)
        if not iv.empty:
            for y in (iv.lo, iv.hi):
                far.setdefault(y, g.node((x1, y), BOUNDARY))
    far_a = sorted(far)
    return Strip(c, bpos, bottom, top, gap, far_a, [far[a] for a in far_a])


def build_graph(fsd: FreeSpaceDiagram) -> ReachabilityGraph:
    """Strips, range and block trees, and the range edges of every boundary critical point."""
    g = ReachabilityGraph(fsd)
    for p in extract_boundary_critical_points(fsd):
        g.node(p.position, BOUNDARY)
    for r in fsd.by_row:
        g.row_strips[r] = _row_strip(fsd, g, r)
    for c in fsd.by_col:
        g.col_strips[c] = _col_strip(fsd, g, c)
    for k in range(len(g.xs)):
        g.successors(k)
    return g


def _check_white(fsd: FreeSpaceDiagram, x: float, y: float) -> None:
    if not (0.0 <= x <= fsd.width and 0.0 <= y <= fsd.height):
        raise ParameterError(f"({x}, {y}) lies outside the diagram")
    if not fsd.is_white(x, y):
        raise ParameterError(f"({x}, {y}) is not white")


def rightmost_reachable(g: ReachabilityGraph, row: int, p: tuple[float, float]) -> CriticalPoint | None:
    """Farthest top-boundary critical point of ``row`` reachable from ``p`` inside the row."""
    fsd = g.fsd
    x, y = p
    _check_white(fsd, x, y)
    if not fsd.row_y(row) <= y <= fsd.row_y(row + 1):
        raise ParameterError(f"y={y} is not in row {row}")
    st = g.row_strips.get(row)
    if st is None:
        return None
    k = st.rightmost(x, y)
    if k is None:
        return None
    return CriticalPoint((st.far_a[k], fsd.row_y(row + 1)), (row, fsd.col_of(st.far_a[k]), "top"))


def insert_greedy_point(g: ReachabilityGraph, p: tuple[float, float]) -> int:
    """Add a sweep-line point (or reuse the node already at that position)."""
    x, y = p
    _check_white(g.fsd, x, y)
    k = g.ids.get((x, y))
    if k is not None:
        return k
    return g.node((x, y), GREEDY)


class SweepContext:
    """Lowest reachable end on the line ``x = t`` from graph nodes, memoised.

    Ends above ``ycap`` are discarded. ``forest`` links every resolved node
    to the successor realising its best end, so ``find_root`` walks to the
    node where the best path leaves the graph for the line.
    """

    def __init__(self, g: ReachabilityGraph, t: float, ycap: float = math.inf):
        self.g = g
        self.t = t
        self.ycap = ycap
        self.memo: dict[Hashable, float] = {}
        self.forest = LinkCutForest()
        self.visits = 0

    def _direct(self, k: int) -> float:
        g, fsd, t = self.g, self.g.fsd, self.t
        x, y = g.xs[k], g.ys[k]
        if x == t:
            return y
        r, c, cell = g.cell_of(k)
        if cell is None or not (cell.x0 <= t <= cell.x1):
            return math.inf
        if t == cell.x1:
            iv = fsd.boundary_v(r, c + 1)
        elif t == cell.x0:
            iv = fsd.boundary_v(r, c)
        else:
            iv = cell.vertical(t)
        if iv.empty:
            return math.inf
        e = max(y, iv.lo)
        return e if e <= iv.hi else math.inf

    def _pruned(self, v) -> bool:
        g = self.g
        if isinstance(v, int):
            return g.xs[v] > self.t or g.ys[v] > self.ycap
        kind, s, node = v
        if kind == "r":
            st = g.row_strips[s]
            return st.far_a[st.tree.lo[node]] > self.t or g.fsd.row_y(s + 1) > self.ycap
        st = g.col_strips[s]
        return g.fsd.col_x(s + 1) > self.t or st.far_a[st.tree.lo[node]] > self.ycap

    def best_end(self, start) -> float:
        memo = self.memo
        if start in memo:
            return memo[start]
        g = self.g
        stack = [start]
        while stack:
            v = stack[-1]
            if v in memo:
                stack.pop()
                continue
            if self._pruned(v):
                memo[v] = math.inf
                stack.pop()
                continue
            kids = g.successors(v) if isinstance(v, int) else g.range_children(v)
            pending = [w for w in kids if w not in memo]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            self.visits += 1
            best = self._direct(v) if isinstance(v, int) else math.inf
            via = None
            for w in kids:
                e = memo[w]
                if e < best:
                    best, via = e, w
            if best > self.ycap:
                best = math.inf
            memo[v] = best
            if via is not None and best < math.inf:
                self.forest.link(v, via)
        return memo[start]

    def terminal(self, start) -> int:
        """Point node at which the best path from ``start`` leaves the graph."""
        return self.forest.find_root(start)
