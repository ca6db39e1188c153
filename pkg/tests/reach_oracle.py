"""Independent reachability references built on the pointwise white predicate."""

import functools

import numpy as np

from sctraj.oracle import simplified_reach


def line_intervals(fun, a, b, iters=80):
    """White sub-interval of ``[a[i], b[i]]`` for many lines at once.

    ``fun(i, t)`` evaluates distance minus threshold at parameters ``t`` of
    lines ``i`` (arrays). The function must be quasi-convex along each line;
    lines without a white point get ``nan`` bounds.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    n = len(a)
    idx = np.arange(n)
    u = np.linspace(0.0, 1.0, 65)
    T = a[:, None] + (b - a)[:, None] * u[None, :]
    V = fun(np.repeat(idx, 65), T.ravel()).reshape(n, 65)
    k = np.argmin(V, axis=1)
    lo = T[idx, np.maximum(k - 1, 0)]
    hi = T[idx, np.minimum(k + 1, 64)]
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        f1, f2 = fun(idx, m1), fun(idx, m2)
        hi = np.where(f1 <= f2, m2, hi)
        lo = np.where(f1 <= f2, lo, m1)
    c = 0.5 * (lo + hi)
    fc = fun(idx, c)
    vk = V[idx, k]
    c = np.where(vk <= fc, T[idx, k], c)
    white = np.minimum(vk, fc) <= 0

    def edge(outside):
        inside = c.copy()
        done = fun(idx, outside) <= 0
        out = outside.copy()
        for _ in range(iters):
            mid = 0.5 * (inside + out)
            ok = fun(idx, mid) <= 0
            inside = np.where(ok, mid, inside)
            out = np.where(ok, out, mid)
        return np.where(done, outside, inside)

    left, right = edge(a), edge(b)
    return np.where(white, left, np.nan), np.where(white, right, np.nan)


def row_rightmost(fsd, row, p, resolution=512):
    """Largest top-boundary ``x`` reachable from ``p`` by a monotone path inside ``row``, or ``None``.

    Sweeps ``resolution`` vertical lines plus every cell boundary; each
    line's white interval comes from bisection on the pointwise predicate.
    Between consecutive lines each cell is convex, so the sweep is exact up
    to the bisection tolerance.
    """
    x, y = p
    y0, y1 = fsd.row_y(row), fsd.row_y(row + 1)
    thr = fsd.config.threshold * (1 + 1e-9)
    tol = 1e-9 * max(1.0, fsd.width + fsd.height)
    xs = np.array(sorted({x, *np.linspace(x, fsd.width, resolution + 1)[1:].tolist(),
                          *(bnd for bnd in fsd.x_bounds if bnd > x)}))
    n = len(xs)
    vlo, vhi = line_intervals(lambda i, t: fsd.distances(xs[i], t) - thr, np.full(n, y0), np.full(n, y1))
    hlo, hhi = line_intervals(lambda i, t: fsd.distances(t, np.full(len(t), y1)) - thr, xs[:-1], xs[1:])
    if np.isnan(vlo[0]) or not vlo[0] - tol <= y <= vhi[0] + tol:
        return None
    low = max(y, vlo[0])
    best = x if abs(vhi[0] - y1) <= tol else None
    for i in range(1, n):
        if not np.isnan(hhi[i - 1]):
            best = hhi[i - 1]
        if np.isnan(vlo[i]) or vhi[i] < low - tol:
            break
        low = max(vlo[i], low)
        if abs(vhi[i] - y1) <= tol:
            best = xs[i]
    return best


def cached_reach(fsd):
    """Reference sweep over ``fsd`` with memoised line intervals."""
    R = simplified_reach(fsd)
    R.vint = functools.lru_cache(maxsize=None)(R.vint)
    R.hint = functools.lru_cache(maxsize=None)(R.hint)
    return R


def exact_reachable_from(fsd, a, targets, R=None):
    """Which ``targets`` a monotone white path from ``a`` reaches in the simplified diagram."""
    R = R or cached_reach(fsd)
    xa, ya = a
    tol = 1e-9 * max(1.0, fsd.width + fsd.height)
    lines = sorted({*(x for x in fsd.x_bounds if x > xa), *(x for x, _ in targets if x > xa)})
    res = R.sweep(xa, [(ya, ya)], lines)
    out = []
    for xb, yb in targets:
        if xb < xa or yb < ya:
            out.append(False)
        else:
            out.append(any(lo - tol <= yb <= hi + tol for lo, hi in res[xb]))
    return out


def graph_reachable(g, k):
    """Point nodes reachable from ``k`` in the graph, range vertices expanded to their leaves."""
    seen, stack, seen_v = {k}, [k], set()
    while stack:
        u = stack.pop()
        for v in g.successors(u):
            for w in g.leaves(v) if not isinstance(v, int) else [v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
            seen_v.add(v)
    return seen
