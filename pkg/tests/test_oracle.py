import numpy as np
import pytest
from conftest import SQUARE_LOOP, random_walk

from sctraj.cluster import ClusterQuery
from sctraj.errors import GuardError
from sctraj.geom import Trajectory
from sctraj.oracle import (
    ExactFreeSpace,
    frechet_decide,
    frechet_distance,
    sc_bruteforce,
    sub_curve,
)


def resample(v, step):
    """Subdivide every edge into pieces of length at most ``step``, keeping the vertices."""
    v = np.asarray(v, dtype=float)
    out = [v[0]]
    for a, b in zip(v[:-1], v[1:]):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / step)))
        t = np.linspace(0, 1, k + 1)[1:, None]
        out.extend(a + t * (b - a))
    return np.asarray(out)


def discrete_frechet(a, b):
    D = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    C = np.full(D.shape, np.inf)
    C[0, 0] = D[0, 0]
    for i in range(len(a)):
        for j in range(len(b)):
            if i == j == 0:
                continue
            prev = min(
                C[i - 1, j] if i else np.inf,
                C[i, j - 1] if j else np.inf,
                C[i - 1, j - 1] if i and j else np.inf,
            )
            C[i, j] = max(prev, D[i, j])
    return C[-1, -1]


def test_identical_curves(rng):
    v = random_walk(rng, 8)
    for d in (0.0, 0.1, 5.0):
        assert frechet_decide(v, v, d)


@pytest.mark.parametrize("h", [0.3, 1.0, 2.5])
def test_parallel_segments(h):
    P = [(0, 0), (1, 0)]
    Q = [(0, h), (1, h)]
    assert frechet_decide(P, Q, h)
    assert frechet_decide(P, Q, h + 1e-9)
    assert not frechet_decide(P, Q, h - 1e-6)


def test_point_against_curve():
    assert frechet_decide([(0, 0)], [(0, 0), (1, 0)], 1.0)
    assert not frechet_decide([(0, 0)], [(0, 0), (1, 0)], 0.9)


def test_decide_flips_at_bisection(rng):
    for _ in range(200):
        P = random_walk(rng, int(rng.integers(2, 7)))
        Q = random_walk(rng, int(rng.integers(2, 7)))
        d = frechet_distance(P, Q, tol=1e-10)
        assert frechet_decide(P, Q, d + 1e-7)
        assert not frechet_decide(P, Q, d - 1e-7)


def test_distance_against_discrete(rng):
    for _ in range(25):
        P = random_walk(rng, int(rng.integers(2, 6)))
        Q = random_walk(rng, int(rng.integers(2, 6)))
        step = 0.05
        d = frechet_distance(P, Q)
        dd = discrete_frechet(resample(P, step), resample(Q, step))
        assert d <= dd + 1e-8
        assert dd <= d + step


def test_sub_curve_endpoints():
    v = np.array([(0, 0), (3, 0), (3, 4)], dtype=float)
    sc = sub_curve(v, 1.0, 5.0)
    assert sc[0] == pytest.approx((1, 0))
    assert sc[-1] == pytest.approx((3, 2))
    assert sc[1] == pytest.approx((3, 0))


def test_exact_space_white(rng):
    P = random_walk(rng, 5)
    Q = random_walk(rng, 6)
    S = ExactFreeSpace(P, Q, 1.0)
    TP, TQ = Trajectory(P), Trajectory(Q)
    for x, y in zip(rng.uniform(0, TP.total_length, 300), rng.uniform(0, TQ.total_length, 300)):
        dist = np.hypot(*(np.asarray(TP.point_at(x)) - np.asarray(TQ.point_at(y))))
        if abs(dist - 1.0) > 1e-9:
            assert S.white(x, y) == (dist <= 1.0)


def test_bruteforce_loop_instance():
    T = Trajectory(SQUARE_LOOP)
    yes, (ref, members) = sc_bruteforce(T, ClusterQuery(3, 2.0, 0.1, 0.25), with_witness=True)
    assert yes
    for a, b in members:
        assert frechet_decide(sub_curve(T, *ref), sub_curve(T, a, b), 0.1 + 1e-9)


def test_bruteforce_trivial_cases():
    T = Trajectory(SQUARE_LOOP)
    assert not sc_bruteforce(T, ClusterQuery(2, 100.0, 0.1, 0.25))
    assert sc_bruteforce(T, ClusterQuery(1, 1.0, 0.1, 0.25))


def test_bruteforce_guard():
    with pytest.raises(GuardError):
        sc_bruteforce(Trajectory(np.arange(40.0).reshape(20, 2)), ClusterQuery(2, 1.0, 0.1, 0.25))


def test_bruteforce_monotone_in_d(rng):
    for _ in range(8):
        v = random_walk(rng, 7, 0.7)
        T = Trajectory(v)
        l = 0.25 * T.total_length
        prev = False
        for d in np.linspace(0.05, 2.0, 8):
            cur = sc_bruteforce(T, ClusterQuery(3, l, float(d), 0.25), grid=256)
            assert cur or not prev
            prev = cur
