import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from kmr.dataset import FunctionalDataset
from kmr.errors import DataError
from kmr.kernels import (Bandwidths, KernelSpec, as_kernel, default_bandwidths, eval_kernel,
                         sample_kernel)

ALL = list(KernelSpec)


class TestEval:
    def test_gaussian_mode(self):
        assert eval_kernel(KernelSpec.GAUSSIAN, 0.0) == pytest.approx(0.3989423, abs=1e-7)

    def test_epanechnikov_outside_support(self):
        assert eval_kernel("epanechnikov", 2.0) == 0.0

    def test_uniform_inside(self):
        assert eval_kernel(KernelSpec.UNIFORM, 0.4) == 0.5

    @pytest.mark.parametrize("kind, u, expected", [
        ("triangular", 0.25, 0.75),
        ("biweight", 0.5, 15 / 16 * 0.75 ** 2),
        ("epanechnikov", 0.5, 0.75 * 0.75),
        ("gaussian", 1.0, math.exp(-0.5) / math.sqrt(2 * math.pi)),
    ])
    def test_hand_values(self, kind, u, expected):
        assert eval_kernel(kind, u) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("spec", ALL)
    def test_integrates_to_one(self, spec):
        lo, hi = (-12, 12) if spec is KernelSpec.GAUSSIAN else (-1, 1)
        total, _ = integrate.quad(lambda u: eval_kernel(spec, u), lo, hi, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("spec", ALL)
    def test_variance_attribute(self, spec):
        lo, hi = (-12, 12) if spec is KernelSpec.GAUSSIAN else (-1, 1)
        second, _ = integrate.quad(lambda u: u * u * eval_kernel(spec, u), lo, hi)
        assert spec.variance == pytest.approx(second, rel=1e-8)

    def test_unknown_kernel(self):
        with pytest.raises(DataError, match="unknown kernel"):
            as_kernel("cosine")

    def test_array_shape_kept(self):
        assert eval_kernel("gaussian", np.zeros((2, 3))).shape == (2, 3)

    @pytest.mark.parametrize("spec", ALL)
    def test_sampler_matches_variance(self, spec):
        draws = sample_kernel(spec, np.random.default_rng(3), 200_000)
        assert draws.var() == pytest.approx(spec.variance, rel=0.02)
        if spec.compact:
            assert np.all(np.abs(draws) <= 1)


@pytest.mark.parametrize("spec", ALL)
@given(u=st.floats(-1e6, 1e6))
def test_kernels_are_even(spec, u):
    assert eval_kernel(spec, u) == eval_kernel(spec, -u)


@given(u=st.floats(-38, 38))
def test_gaussian_positive(u):
    assert eval_kernel(KernelSpec.GAUSSIAN, u) > 0


def _ds(times, values):
    return FunctionalDataset(np.asarray(times, float), np.asarray(values, float))


class TestDefaultBandwidths:
    def test_sparser_dataset_sets_time_bandwidth(self):
        d1 = _ds(np.arange(0, 21, 2), np.linspace(0, 10, 11))
        d2 = _ds(np.arange(0, 21), np.linspace(0, 5, 21))
        bw = default_bandwidths(d1, d2)
        assert bw.h_t == pytest.approx(1.0)
        assert bw.h_y == pytest.approx(1.0)

    def test_equal_density(self):
        d1 = _ds(np.arange(0, 21, 2), np.linspace(-5, 0, 11))
        d2 = _ds(np.arange(1, 22, 2), np.linspace(0, 5, 11))
        bw = default_bandwidths(d1, d2)
        assert (bw.h_t, bw.h_y) == pytest.approx((1.0, 1.0))

    def test_range_from_pooled_values(self):
        d1 = _ds([0, 1, 2], [0.0, 0.5, 1.0])
        d2 = _ds([0, 1, 2], [0.3, 0.3, 0.3])
        assert default_bandwidths(d1, d2).h_y == pytest.approx(0.1)

    def test_degenerate_range(self):
        d = _ds([0, 1], [2.0, 2.0])
        with pytest.raises(DataError, match="degenerate-range"):
            default_bandwidths(d, d)

    def test_too_few_points(self):
        with pytest.raises(DataError, match="too-few-points"):
            default_bandwidths(_ds([0], [1]), _ds([0, 1], [0, 1]))

    @given(st.integers(2, 40), st.integers(2, 40), st.floats(0.1, 10), st.floats(0.1, 10))
    def test_depends_only_on_sparser_gap_and_range(self, n1, n2, gap1, gap2):
        rng = np.random.default_rng(n1 * 100 + n2)
        d1 = _ds(gap1 * np.arange(n1), rng.normal(size=n1))
        d2 = _ds(gap2 * np.arange(n2), rng.normal(size=n2))
        bw = default_bandwidths(d1, d2)
        swapped = default_bandwidths(d2, d1)
        assert bw.h_t == pytest.approx(0.5 * max(gap1, gap2), rel=1e-12)
        assert bw == swapped

    @pytest.mark.parametrize("h_t, h_y", [(0, 1), (1, -1), (math.inf, 1), (1, math.nan)])
    def test_bandwidths_validate(self, h_t, h_y):
        with pytest.raises(DataError):
            Bandwidths(h_t, h_y)
