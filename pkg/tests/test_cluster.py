import math

import numpy as np
import pytest
from conftest import SQUARE_LOOP, jittered_repeats, random_walk

from sctraj.cluster import (
    ARBITRARY,
    BOUNDARY,
    END_OF_CELL,
    L_APART,
    PROPAGATED,
    VERTEX,
    ClusterQuery,
    Window,
    count_disjoint_paths,
    decide,
    decide_full,
    internal_critical_points,
    l_apart_points,
    perturb_if_degenerate,
    windows_arbitrary,
    windows_vertex,
)
from sctraj.errors import ParameterError
from sctraj.freespace import FreeSpaceConfig, build_diagram
from sctraj.geom import Trajectory
from sctraj.oracle import ExactFreeSpace, frechet_decide, greedy_count, sub_curve
from sctraj.reachability import build_graph

# unit square traversed twice plus one more bottom edge: the bottom edge recurs 4 apart
REPEATED_EDGE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] * 2 + [(0.0, 0.0), (1.0, 0.0)]


def test_query_validation():
    with pytest.raises(ParameterError):
        ClusterQuery(0, 1.0, 1.0, 0.1)
    with pytest.raises(ParameterError):
        ClusterQuery(2, -1.0, 1.0, 0.1)
    with pytest.raises(ParameterError):
        ClusterQuery(2, 1.0, 0.0, 0.1)
    with pytest.raises(ParameterError):
        ClusterQuery(2, 1.0, 1.0, 0.1, "sideways")


def test_windows_vertex_unit_line():
    T = Trajectory([(float(i), 0.0) for i in range(11)])
    ws = windows_vertex(T, 2.0)
    assert ws == [Window(float(i), float(i + 2)) for i in range(9)]
    assert windows_vertex(T, 11.0) == []


def test_windows_vertex_brute_force(rng):
    for _ in range(50):
        T = Trajectory(random_walk(rng, int(rng.integers(2, 30))))
        l = float(rng.uniform(0.1, 0.6) * T.total_length)
        pre = list(T._pre)
        brute = []
        for i, s in enumerate(pre):
            later = [t for t in pre[i + 1:] if t - s >= l]
            if later:
                brute.append(Window(s, later[0]))
        assert windows_vertex(T, l) == brute


def test_windows_arbitrary_have_length_l(rng):
    T = Trajectory(random_walk(rng, 10, 0.5))
    fsd = build_diagram(T, T, FreeSpaceConfig(0.3, 0.25))
    l = 0.3 * T.total_length
    ws = windows_arbitrary(fsd, internal_critical_points(fsd, l), l)
    assert ws[0].s == 0.0
    assert ws[-1].s == pytest.approx(T.total_length - l)
    for w in ws:
        assert w.t - w.s == pytest.approx(l)
    assert all(a.s < b.s for a, b in zip(ws, ws[1:]))


def test_single_cell_has_no_l_apart_points():
    T = Trajectory([(0, 0), (1, 0)])
    fsd = build_diagram(T, T, FreeSpaceConfig(0.1, 0.25))
    pts = internal_critical_points(fsd, 0.5)
    kinds = {p.kind for p in pts}
    assert BOUNDARY in kinds and L_APART not in kinds
    # the cell's end points coincide with boundary corners and keep that label
    cell = next(iter(fsd.cells.values()))
    assert set(cell.extremes()[:2]) <= {p.position for p in pts}


def test_propagated_points_on_boundary(rng):
    for _ in range(10):
        T = Trajectory(random_walk(rng, 10, 0.5))
        d = float(rng.uniform(0.2, 0.8))
        fsd = build_diagram(T, T, FreeSpaceConfig(d, 0.25))
        pts = [p for p in internal_critical_points(fsd, 0.4 * T.total_length) if p.kind == PROPAGATED]
        thr = fsd.config.threshold
        for p in pts:
            dist = fsd.distances(np.array([p.position[0]]), np.array([p.position[1]]))[0]
            assert abs(dist - thr) <= 1e-9 * d


def test_l_apart_points_are_l_apart(rng):
    T = Trajectory(jittered_repeats(rng))
    fsd = build_diagram(T, T, FreeSpaceConfig(0.3, 0.25))
    l = 0.3 * T.total_length
    pts, infinite = l_apart_points(fsd, l)
    assert not infinite
    thr = fsd.config.threshold
    for x, y in pts:
        a = fsd.distances(np.array([x, x + l]), np.array([y, y]))
        assert np.all(np.abs(a - thr) <= 1e-6 * thr)


def test_perturbation_generic_inputs(rng):
    for _ in range(10):
        T = Trajectory(random_walk(rng, 10, 0.5))
        fsd = build_diagram(T, T, FreeSpaceConfig(0.4, 0.25))
        l = float(rng.uniform(0.2, 0.5) * T.total_length)
        assert perturb_if_degenerate(fsd, l) == (l, False)


def test_perturbation_repeated_edge():
    T = Trajectory(REPEATED_EDGE)
    d, eps = 0.1, 0.25
    fsd = build_diagram(T, T, FreeSpaceConfig(d, eps))
    assert l_apart_points(fsd, 4.0)[1]
    l2, flag = perturb_if_degenerate(fsd, 4.0)
    assert flag
    assert l2 == pytest.approx(4.0 + eps * eps * d)
    pts, infinite = l_apart_points(fsd, l2)
    assert not infinite


def test_count_all_white():
    T = Trajectory([(0, 0), (1, 0), (1, 1), (2, 1)])
    fsd = build_diagram(T, T, FreeSpaceConfig(10.0, 0.25))
    g = build_graph(fsd)
    for cap in (1, 3, 5):
        assert count_disjoint_paths(fsd, g, Window(1.0, 2.0), cap) == cap


def test_count_tiny_d(rng):
    T = Trajectory(random_walk(rng, 10, 1.0))
    fsd = build_diagram(T, T, FreeSpaceConfig(1e-4, 0.25))
    g = build_graph(fsd)
    for w in windows_vertex(T, 0.2 * T.total_length):
        assert count_disjoint_paths(fsd, g, w, 3) == 0


def test_count_rejects_negative_cap():
    T = Trajectory([(0, 0), (1, 0)])
    fsd = build_diagram(T, T, FreeSpaceConfig(0.1, 0.25))
    with pytest.raises(ParameterError):
        count_disjoint_paths(fsd, build_graph(fsd), Window(0.0, 1.0), -1)


def test_count_sandwiched_by_exact_greedy(rng):
    for _ in range(40):
        v = jittered_repeats(rng, 10)
        T = Trajectory(v)
        d, eps = float(rng.uniform(0.05, 0.5)), float(rng.choice([0.1, 0.25, 0.5]))
        fsd = build_diagram(T, T, FreeSpaceConfig(d, eps))
        g = build_graph(fsd)
        inner = ExactFreeSpace(v, v, d)
        outer = ExactFreeSpace(v, v, (1 + eps) * d)
        cap = int(rng.integers(1, 4))
        for w in windows_vertex(T, 0.2 * T.total_length)[:6]:
            got = count_disjoint_paths(fsd, g, w, cap)
            assert len(greedy_count(inner, w.s, w.t, cap)) <= got <= len(greedy_count(outer, w.s, w.t, cap))


def test_decide_loop_example(square_loop):
    ok, wit = decide(square_loop, ClusterQuery(3, 2.0, 0.1, 0.25, VERTEX))
    assert ok
    assert wit.reference == (0.0, 2.0)
    assert len(wit.members) == 2
    ref = sub_curve(square_loop, *wit.reference)
    for a, b in wit.members:
        assert frechet_decide(ref, sub_curve(square_loop, a, b), 1.25 * 0.1)
    lo = sorted(wit.members)
    assert lo[0][1] <= lo[1][0]


def test_decide_trivial_answers(square_loop):
    assert decide(square_loop, ClusterQuery(3, 100.0, 0.1, 0.25)) == (False, None)
    ok, wit = decide(square_loop, ClusterQuery(1, 1.0, 0.1, 0.25))
    assert ok and wit.members == () and wit.reference == (0.0, square_loop.total_length)


def test_decide_reports_counts(square_loop):
    r = decide_full(square_loop, ClusterQuery(3, 2.0, 0.1, 0.25, ARBITRARY))
    assert r.answer and r.perturbed
    assert r.l_used == pytest.approx(2.0 + 0.25 ** 2 * 0.1)
    assert r.counts["cells"] > 0 and r.counts["internal_points"] > 0
    assert set(r.timings) == {"simplify", "near_pairs", "cells", "graph", "sweep"}
    assert sum(r.counts[f"points_{k}"] for k in (END_OF_CELL, PROPAGATED, L_APART, BOUNDARY)) == r.counts["internal_points"]


def test_decide_witness_members_disjoint(rng):
    for _ in range(15):
        T = Trajectory(jittered_repeats(rng))
        q = ClusterQuery(3, 0.2 * T.total_length, 0.3, 0.25)
        ok, wit = decide(T, q)
        if not ok:
            continue
        s, t = wit.reference
        spans = sorted([wit.reference, *wit.members])
        for (a, b), (c, e) in zip(spans, spans[1:]):
            assert b <= c + 1e-9 * T.total_length or math.isclose(a, b)


def test_straight_line_translates_are_far():
    # [2, 4] is [0, 2] shifted by 2 along the line, so their Fréchet distance is 2
    T = Trajectory([(float(i), 0.0) for i in range(11)])
    assert not decide(T, ClusterQuery(3, 2.0, 0.1, 0.25, VERTEX))[0]
    assert decide(T, ClusterQuery(3, 2.0, 2.0, 0.25, VERTEX))[0]
