"""Static search trees and a dynamic forest used by the sweep."""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from typing import Hashable, Iterable, Sequence

from .errors import StructureError


class RangeTree:
    """Balanced binary tree over keys sorted ascending.

    Node ``v`` covers the contiguous leaf range ``span(v) = [lo, hi)``; the
    leaves in that range form its canonical subset. Node ``0`` is the root.
    """

    def __init__(self, keys: Iterable[float]):
        self.keys = sorted(keys)
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_node: list[int] = [0] * len(self.keys)
        if self.keys:
            self._build(0, len(self.keys))

    def _build(self, lo: int, hi: int) -> int:
        v = len(self.lo)
        self.lo.append(lo)
        self.hi.append(hi)
        self.left.append(-1)
        self.right.append(-1)
        if hi - lo == 1:
            self.leaf_node[lo] = v
        else:
            mid = (lo + hi + 1) // 2
            self.left[v] = self._build(lo, mid)
            self.right[v] = self._build(mid, hi)
        return v

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def n_nodes(self) -> int:
        return len(self.lo)

    def span(self, v: int) -> tuple[int, int]:
        return self.lo[v], self.hi[v]

    def is_leaf(self, v: int) -> bool:
        return self.left[v] < 0

    def height(self) -> int:
        if not self.keys:
            return 0
        best, stack = 0, [(0, 1)]
        while stack:
            v, h = stack.pop()
            best = max(best, h)
            if self.left[v] >= 0:
                stack.append((self.left[v], h + 1))
                stack.append((self.right[v], h + 1))
        return best

    def index_range(self, lo_x: float, hi_x: float) -> tuple[int, int]:
        """Leaf indices ``[i, j)`` of keys in ``[lo_x, hi_x]``."""
        return bisect_left(self.keys, lo_x), bisect_right(self.keys, hi_x)

    def cover_indices(self, i: int, j: int) -> list[int]:
        """Canonical nodes whose leaves are exactly ``[i, j)``, left to right."""
        if i >= j:
            return []
        out: list[int] = []
        stack = [0]
        lo, hi, left, right = self.lo, self.hi, self.left, self.right
        while stack:
            v = stack.pop()
            a, b = lo[v], hi[v]
            if b <= i or a >= j:
                continue
            if i <= a and b <= j:
                out.append(v)
            else:
                stack.append(right[v])
                stack.append(left[v])
        return out


def range_cover(tree: RangeTree, lo_x: float, hi_x: float) -> list[int]:
    """Minimal canonical nodes covering exactly the keys in ``[lo_x, hi_x]``."""
    if lo_x > hi_x:
        return []
    return tree.cover_indices(*tree.index_range(lo_x, hi_x))


BOTTOM = "bottom"
TOP = "top"


class BlockTree:
    """First-blocker search over the vertical boundaries of one row.

    Boundary ``j`` blocks a height ``y`` when ``y <= bottom[j]`` or
    ``y >= top[j]``. Internal nodes keep the maximum bottom and minimum top
    of their leaves, which is what a descent needs to skip subtrees that
    cannot block.
    """

    def __init__(self, bottoms: Sequence[float], tops: Sequence[float]):
        if len(bottoms) != len(tops):
            raise ValueError("bottoms and tops differ in length")
        self.n = len(bottoms)
        self.bottoms = list(bottoms)
        self.tops = list(tops)
        size = 1
        while size < max(self.n, 1):
            size *= 2
        self.size = size
        self.mx = [-math.inf] * (2 * size)
        self.mn = [math.inf] * (2 * size)
        for j in range(self.n):
            self.mx[size + j] = self.bottoms[j]
            self.mn[size + j] = self.tops[j]
        for v in range(size - 1, 0, -1):
            self.mx[v] = max(self.mx[2 * v], self.mx[2 * v + 1])
            self.mn[v] = min(self.mn[2 * v], self.mn[2 * v + 1])

    def _blocks(self, v: int, y: float) -> bool:
        return self.mx[v] >= y or self.mn[v] <= y

    def first_blocker(self, start: int, y: float) -> tuple[int, str] | None:
        """Smallest ``j >= start`` blocking ``y``."""
        if start >= self.n:
            return None
        start = max(start, 0)
        size, mx, mn = self.size, self.mx, self.mn
        v = size + start
        # climb until a right-hand subtree contains a blocker
        if not (mx[v] >= y or mn[v] <= y):
            while True:
                if v == 1:
                    return None
                if v & 1 == 0 and (mx[v + 1] >= y or mn[v + 1] <= y):
                    v += 1
                    break
                v >>= 1
            while v < size:
                v = 2 * v if (mx[2 * v] >= y or mn[2 * v] <= y) else 2 * v + 1
        j = v - size
        if j >= self.n:
            return None
        return (j, BOTTOM) if y <= self.bottoms[j] else (j, TOP)


def first_blocker(tree: BlockTree, from_boundary: int, y: float) -> tuple[int, str] | None:
    """Smallest ``j > from_boundary`` whose boundary blocks height ``y``."""
    return tree.first_blocker(from_boundary + 1, y)


class _ITNode:
    __slots__ = ("center", "by_lo", "by_hi", "left", "right")

    def __init__(self, center, by_lo, by_hi, left, right):
        self.center = center
        self.by_lo = by_lo
        self.by_hi = by_hi
        self.left = left
        self.right = right


class RowIntervalTree:
    """Centered interval tree over closed intervals ``(lo, hi, ident)``."""

    def __init__(self, intervals: Iterable[tuple[float, float, Hashable]]):
        self.intervals = [iv for iv in intervals if iv[0] <= iv[1]]
        self.root = self._build(self.intervals)

    def _build(self, ivs):
        if not ivs:
            return None
        ends = sorted(e for iv in ivs for e in iv[:2])
        center = ends[len(ends) // 2]
        here, lefts, rights = [], [], []
        for iv in ivs:
            if iv[1] < center:
                lefts.append(iv)
            elif iv[0] > center:
                rights.append(iv)
            else:
                here.append(iv)
        by_lo = sorted(here, key=lambda iv: iv[0])
        by_hi = sorted(here, key=lambda iv: -iv[1])
        return _ITNode(center, by_lo, by_hi, self._build(lefts), self._build(rights))

    def stab(self, y: float) -> set:
        out = set()
        node = self.root
        while node is not None:
            if y < node.center:
                for lo, hi, ident in node.by_lo:
                    if lo > y:
                        break
                    out.add(ident)
                node = node.left
            elif y > node.center:
                for lo, hi, ident in node.by_hi:
                    if hi < y:
                        break
                    out.add(ident)
                node = node.right
            else:
                out.update(iv[2] for iv in node.by_lo)
                break
        return out


def stab(tree: RowIntervalTree, y: float) -> set:
    return tree.stab(y)


class LinkCutForest:
    """Rooted dynamic forest (splay-tree based link-cut trees).

    Nodes are arbitrary hashable identifiers, created on first use.
    """

    def __init__(self):
        self._id: dict = {}
        self._names: list = [None]
        self._par = [0]
        self._l = [0]
        self._r = [0]

    def __len__(self) -> int:
        return len(self._names) - 1

    def __contains__(self, node) -> bool:
        return node in self._id

    def add(self, node) -> int:
        k = self._id.get(node)
        if k is None:
            k = len(self._names)
            self._id[node] = k
            self._names.append(node)
            self._par.append(0)
            self._l.append(0)
            self._r.append(0)
        return k

    def _is_root(self, x: int) -> bool:
        p = self._par[x]
        return p == 0 or (self._l[p] != x and self._r[p] != x)

    def _rotate(self, x: int) -> None:
        par, L, R = self._par, self._l, self._r
        p = par[x]
        g = par[p]
        if not self._is_root(p):
            if L[g] == p:
                L[g] = x
            else:
                R[g] = x
        par[x] = g
        if L[p] == x:
            b = R[x]
            L[p] = b
            R[x] = p
        else:
            b = L[x]
            R[p] = b
            L[x] = p
        if b:
            par[b] = p
        par[p] = x

    def _splay(self, x: int) -> None:
        par, L = self._par, self._l
        while not self._is_root(x):
            p = par[x]
            if not self._is_root(p):
                g = par[p]
                if (L[g] == p) == (L[p] == x):
                    self._rotate(p)
                else:
                    self._rotate(x)
            self._rotate(x)

    def _access(self, x: int) -> None:
        last, y = 0, x
        while y:
            self._splay(y)
            self._r[y] = last
            last = y
            y = self._par[y]
        self._splay(x)

    def _root(self, x: int) -> int:
        self._access(x)
        while self._l[x]:
            x = self._l[x]
        self._splay(x)
        return x

    def find_root(self, node):
        return self._names[self._root(self.add(node))]

    def link(self, child, parent) -> None:
        c, p = self.add(child), self.add(parent)
        if self._root(c) != c:
            raise StructureError(f"{child!r} already has a parent")
        if self._root(p) == c:
            raise StructureError(f"linking {child!r} under {parent!r} creates a cycle")
        self._access(c)
        self._par[c] = p

    def cut(self, child) -> None:
        c = self._id.get(child)
        if c is None:
            raise StructureError(f"{child!r} is a root")
        self._access(c)
        left = self._l[c]
        if not left:
            raise StructureError(f"{child!r} is a root")
        self._par[left] = 0
        self._l[c] = 0


def link(f: LinkCutForest, child, parent) -> None:
    f.link(child, parent)


def cut(f: LinkCutForest, child) -> None:
    f.cut(child)


def find_root(f: LinkCutForest, node):
    return f.find_root(node)
