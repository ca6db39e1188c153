import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sctraj.geom import Trajectory

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# square of side 0.5 traversed three times, closed at the origin (length 6)
SQUARE_LOOP = [(0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.0, 0.5)] * 3 + [(0.0, 0.0)]

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def polylines(draw, min_size=2, max_size=8):
    n = draw(st.integers(min_size, max_size))
    pts = draw(st.lists(st.tuples(coord, coord), min_size=n, max_size=n))
    return np.asarray(pts, dtype=float)


def random_walk(rng, n, scale=1.0):
    return np.cumsum(rng.normal(scale=scale, size=(n, 2)), axis=0)


def jittered_repeats(rng, n_max=12):
    """A short base shape repeated with noise; produces many near-cluster instances."""
    k = int(rng.integers(3, 6))
    base = rng.uniform(0, 2, size=(k, 2))
    pts = []
    for _ in range(int(rng.integers(2, 4))):
        pts.extend(base + rng.normal(scale=rng.choice([0.02, 0.1, 0.3]), size=base.shape))
    return np.asarray(pts[:n_max])


@pytest.fixture
def square_loop():
    return Trajectory(SQUARE_LOOP)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
