import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from kmr.dataset import FunctionalDataset
from kmr.warp import WarpFunction

settings.register_profile(
    "kmr", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("kmr")


def random_dataset(rng, n, lo=0.0, hi=100.0, scale=1.0):
    """Sorted uniform times with standard normal values."""
    t = np.sort(rng.uniform(lo, hi, n))
    return FunctionalDataset(t, scale * rng.standard_normal(n))


@st.composite
def warps(draw, lo=0.0, hi=10.0, max_segments=8):
    """Random monotone warps on ``[lo, hi]`` with well-separated slopes."""
    n = draw(st.integers(1, max_segments))
    steps = draw(st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n))
    start = draw(st.floats(-5.0, 5.0))
    spacing = (hi - lo) / n
    values = start + spacing * np.concatenate([[0.0], np.cumsum(steps)])
    return WarpFunction.from_values(lo, hi, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
