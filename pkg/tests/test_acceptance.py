"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import time

import numpy as np
import pytest
from conftest import SQUARE_LOOP, random_walk
from naive_forest import random_script
from reach_oracle import cached_reach, exact_reachable_from, graph_reachable, row_rightmost
from test_cluster import REPEATED_EDGE

from sctraj.cluster import ARBITRARY, VERTEX, ClusterQuery, decide_full, l_apart_points, perturb_if_degenerate
from sctraj.freespace import FreeSpaceConfig, build_diagram
from sctraj.generate import spiral
from sctraj.geom import Trajectory
from sctraj.oracle import frechet_decide, sc_bruteforce, sub_curve
from sctraj.reachability import build_graph, extract_boundary_critical_points, rightmost_reachable
from sctraj.simplify import simplification, simplify_curve
from sctraj.structures import LinkCutForest

SPIRAL_SIZES = (500, 1000, 2000, 4000, 8000)
SPIRAL_QUERY = ClusterQuery(3, 5.0, 0.2, 0.25, VERTEX)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {k:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def curve_pairs(rng, count, n_max=200):
    for _ in range(count):
        n = int(rng.integers(3, n_max + 1))
        P = Trajectory(random_walk(rng, n, 0.5))
        Q = Trajectory(random_walk(rng, int(rng.integers(3, n_max + 1)), 0.5) + rng.normal(scale=0.5, size=2))
        cfg = FreeSpaceConfig(float(rng.uniform(0.2, 1.5)), float(rng.choice([0.1, 0.25, 0.5])))
        yield P, Q, build_diagram(P, Q, cfg)


def test_criterion_01_sandwich_inclusion(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    bad = total = 0
    for P, Q, fsd in curve_pairs(rng, 50):
        d, eps = fsd.config.d, fsd.config.eps
        # half uniform, half inside non-empty cells where the boundary lives
        xs = rng.uniform(0, fsd.width, 100_000)
        ys = rng.uniform(0, fsd.height, 100_000)
        cells = list(fsd.cells.values())
        if cells:
            pick = rng.integers(len(cells), size=50_000)
            x0 = np.array([cells[i].x0 for i in pick])
            x1 = np.array([cells[i].x1 for i in pick])
            y0 = np.array([cells[i].y0 for i in pick])
            y1 = np.array([cells[i].y1 for i in pick])
            xs[:50_000] = x0 + rng.random(50_000) * (x1 - x0)
            ys[:50_000] = y0 + rng.random(50_000) * (y1 - y0)
        dist = np.hypot(*(P.points_at(xs) - Q.points_at(ys)).T)
        white = fsd.is_white_many(xs, ys)
        bad += int(np.sum((dist <= d) & ~white) + np.sum(white & (dist > (1 + eps) * d)))
        total += len(xs)
    dt = time.perf_counter() - t0
    report(1, bad == 0 and dt < 60, f"{bad} violations over {total} samples in {dt:.1f}s")


def test_criterion_02_length_preservation(report):
    rng = np.random.default_rng(102)
    worst = 0.0
    built = 0
    for P, Q, fsd in curve_pairs(rng, 100):
        worst = max(worst, abs(fsd.width - P.total_length) / P.total_length,
                    abs(fsd.height - Q.total_length) / Q.total_length)
        built += 1
    for n in (500, 2000):
        S = Trajectory(spiral(n))
        fsd = build_diagram(S, S, FreeSpaceConfig(0.2, 0.25))
        worst = max(worst, abs(fsd.width - S.total_length) / S.total_length)
        built += 1
    report(2, worst <= 1e-9, f"worst relative span error {worst:.2e} over {built} diagrams")


def repeated_instance(rng):
    k = rng.integers(3, 6)
    base = rng.uniform(0, 2, size=(k, 2))
    pts = []
    for _ in range(rng.integers(2, 4)):
        pts.extend(base + rng.normal(scale=rng.choice([0.02, 0.1, 0.3]), size=base.shape))
    return np.array(pts[:12])


def test_criterion_03_decision_sandwich(report):
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    misses = unsound = yes = 0
    N = 300
    for it in range(N):
        v = repeated_instance(rng)
        T = Trajectory(v)
        eps = float(rng.choice([0.1, 0.25, 0.5]))
        q = ClusterQuery(int(rng.integers(2, 5)), float(rng.uniform(0.05, 0.2) * T.total_length),
                         float(rng.uniform(0.05, 0.6)), eps, (VERTEX, ARBITRARY)[it % 2])
        truth = sc_bruteforce(T, q)
        r = decide_full(T, q)
        yes += truth
        misses += truth and not r.answer
        if r.answer:
            ref = sub_curve(v, *r.witness.reference)
            unsound += sum(not frechet_decide(ref, sub_curve(v, a, b), (1 + eps) * q.d) for a, b in r.witness.members)
    dt = time.perf_counter() - t0
    report(3, misses == 0 and unsound == 0 and dt < 600,
           f"{N} instances ({yes} exact YES): {misses} missed, {unsound} unsound members, {dt:.0f}s")


def test_criterion_04_cell_scaling(report):
    counts = []
    for n in SPIRAL_SIZES:
        S = Trajectory(spiral(n))
        counts.append(len(build_diagram(S, S, FreeSpaceConfig(SPIRAL_QUERY.d, SPIRAL_QUERY.eps))))
    slope = loglog_slope(SPIRAL_SIZES, counts)
    report(4, slope <= 1.15, f"cell counts {counts}, slope {slope:.3f}")


def test_criterion_05_runtime_scaling(report):
    times = []
    for n in SPIRAL_SIZES:
        S = Trajectory(spiral(n))
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            decide_full(S, SPIRAL_QUERY)
            runs.append(time.perf_counter() - t0)
        times.append(float(np.median(runs)))
    slope = loglog_slope(SPIRAL_SIZES, times)
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = slope <= 1.35 and max(ratios) <= 2.8
    report(5, ok, f"median times {[round(t, 3) for t in times]}, slope {slope:.3f}, "
                  f"doubling ratios {[round(x, 2) for x in ratios]}")


def test_criterion_06_rightmost_reachable(report):
    rng = np.random.default_rng(106)
    done = bad = 0
    while done < 1000:
        P = Trajectory(random_walk(rng, int(rng.integers(3, 10)), 0.5))
        Q = Trajectory(random_walk(rng, int(rng.integers(3, 10)), 0.5) + rng.normal(scale=0.2, size=2))
        fsd = build_diagram(P, Q, FreeSpaceConfig(float(rng.uniform(0.3, 1.2)), 0.25))
        if not len(fsd):
            continue
        g = build_graph(fsd)
        r = int(rng.choice(list(fsd.by_row)))
        cols = fsd.by_row[r]
        b = int(rng.choice(sorted(set(cols) | {c + 1 for c in cols})))
        iv = fsd.boundary_v(r, b)
        if iv.empty:
            continue
        u = rng.random()
        y = iv.lo if u < 0.2 else iv.hi if u < 0.3 else float(rng.uniform(iv.lo, iv.hi))
        p = (fsd.col_x(b), y)
        got = rightmost_reachable(g, r, p)
        ref = row_rightmost(fsd, r, p)
        done += 1
        if got is None or ref is None:
            bad += (got is None) != (ref is None)
        else:
            bad += abs(got.position[0] - ref) > 1e-7 * max(1.0, fsd.width)
    report(6, bad == 0, f"{done - bad}/{done} row queries agree with the discretised sweep")


def test_criterion_07_basic_path_completeness(report):
    rng = np.random.default_rng(107)
    done = bad = pairs = 0
    while done < 100:
        P = Trajectory(random_walk(rng, int(rng.integers(2, 5)), 0.6))
        Q = Trajectory(random_walk(rng, int(rng.integers(2, 5)), 0.6) + rng.normal(scale=0.2, size=2))
        fsd = build_diagram(P, Q, FreeSpaceConfig(float(rng.uniform(0.3, 1.2)), 0.25))
        if not 1 <= len(fsd) <= 8:
            continue
        done += 1
        g = build_graph(fsd)
        cps = [c.position for c in extract_boundary_critical_points(fsd)]
        R = cached_reach(fsd)
        for a in cps:
            reach = {g.position(k) for k in graph_reachable(g, g.ids[a])}
            for b, e in zip(cps, exact_reachable_from(fsd, a, cps, R)):
                pairs += 1
                bad += e != (b in reach)
    report(7, bad == 0, f"{pairs - bad}/{pairs} critical-point pairs agree over {done} diagrams")


def test_criterion_08_link_cut_differential(report):
    rng = np.random.default_rng(108)
    n, ops = 500, 1_000_000
    f = LinkCutForest()
    for v in range(n):
        f.add(v)
    bad = 0
    for op, a, b, expected in random_script(rng, n, ops):
        if op == "link":
            f.link(a, b)
        elif op == "cut":
            f.cut(a)
        else:
            bad += f.find_root(a) != expected
    report(8, bad == 0, f"{ops} operations, {bad} find_root mismatches")


def test_criterion_09_simplification_bounds(report):
    rng = np.random.default_rng(109)
    short = far = 0
    for _ in range(500):
        T = Trajectory(random_walk(rng, int(rng.integers(2, 60)), float(rng.uniform(0.1, 1.0))))
        mu = float(rng.uniform(0.02, 1.0))
        S = simplify_curve(T, mu)
        seg = np.hypot(*np.diff(S.simplified_trajectory.vertices, axis=0).T)
        short += int(np.sum(seg[:-1] < mu * (1 - 1e-9)))
        M = simplification(T, mu)
        xs = rng.uniform(0, T.total_length, 500)
        dist = np.hypot(*(T.points_at(xs) - M.simplified.points_at(M.map_many(xs))).T)
        far += int(np.sum(dist > 2 * mu * (1 + 1e-9)))
    report(9, short == 0 and far == 0, f"500 curves: {short} short segments, {far} samples beyond 2 mu")


def degeneracy_case(vertices, m, l, d=0.1, eps=0.25):
    delta = eps * eps * d
    T = Trajectory(vertices)
    fsd = build_diagram(T, T, FreeSpaceConfig(d, eps))
    degenerate = l_apart_points(fsd, l)[1]
    l2, flag = perturb_if_degenerate(fsd, l)
    pts, infinite = l_apart_points(fsd, l2)
    r = decide_full(T, ClusterQuery(m, l, d, eps, ARBITRARY))
    above = sc_bruteforce(T, ClusterQuery(m, l + delta, d, eps, ARBITRARY))
    below = sc_bruteforce(T, ClusterQuery(m, l - delta, d, eps, ARBITRARY))
    sound = True
    if r.answer:
        ref = sub_curve(vertices, *r.witness.reference)
        sound = all(frechet_decide(ref, sub_curve(vertices, a, b), (1 + eps) * d) for a, b in r.witness.members)
    ok = (degenerate and flag and r.perturbed and abs(l2 - l - delta) <= 1e-12 and not infinite
          and (r.answer or not above) and sound)
    detail = (f"l={l}: flag {flag}, {len(pts)} l-apart points after shift, decide {r.answer}, "
              f"exact at l+delta {above} / l-delta {below}, witness sound {sound}")
    return ok, detail


def test_criterion_10_degeneracy(report):
    results = [degeneracy_case(REPEATED_EDGE, 2, 4.0), degeneracy_case(SQUARE_LOOP, 3, 2.0)]
    report(10, all(ok for ok, _ in results), "; ".join(d for _, d in results))
