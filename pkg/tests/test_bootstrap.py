import numpy as np
import pytest

from kmr import bootstrap as bs
from kmr.bootstrap import bootstrap_se, build_model, draw_replicate, replicate_rng
from kmr.errors import ConvergenceError, DataError
from kmr.optimizer import FitConfig, fit_warp
from kmr.simulation import ScenarioSpec, gen_run


@pytest.fixture(scope="module")
def instance():
    spec = ScenarioSpec(4, n1=60, n2=50, master_seed=9)
    d1, d2, _ = gen_run(spec, 0)
    fit = fit_warp(d1, d2, cfg=FitConfig(n_segments=8))
    return d1, d2, fit, build_model(d1, d2, fit)


@pytest.fixture(scope="module")
def grid(instance):
    return np.linspace(*instance[2].warp.domain, 41)


class TestModel:
    def test_replicate_sizes(self, instance):
        d1, d2, _, model = instance
        for r in range(5):
            b1, b2 = draw_replicate(model, replicate_rng(0, r))
            assert (len(b1), len(b2)) == (len(d1), len(d2))

    def test_replicate_times_inside_spans(self, instance):
        d1, d2, fit, model = instance
        b1, b2 = draw_replicate(model, replicate_rng(4, 0))
        assert d1.span[0] <= b1.times[0] and b1.times[-1] <= d1.span[1]
        lo, hi = fit.warp.domain
        assert lo <= b2.times[0] and b2.times[-1] <= hi

    def test_streams_depend_on_seed_and_index(self, instance):
        model = instance[3]
        a = draw_replicate(model, replicate_rng(1, 0))[0]
        assert a == draw_replicate(model, replicate_rng(1, 0))[0]
        assert a != draw_replicate(model, replicate_rng(1, 1))[0]
        assert a != draw_replicate(model, replicate_rng(2, 0))[0]

    def test_kde_ingredients(self, instance):
        d1, d2, _, model = instance
        assert model.f_target_times.support == d1.span
        assert model.f_source_times.support == d2.span
        assert model.f_target_errors.support is None
        assert model.f_target_errors.data.size == len(d1)


class TestStandardError:
    def test_deterministic_and_prefix_stable(self, instance, grid):
        d1, d2, fit, model = instance
        a = bootstrap_se(d1, d2, fit, 4, 17, grid, model=model)
        b = bootstrap_se(d1, d2, fit, 4, 17, grid, model=model)
        c = bootstrap_se(d1, d2, fit, 5, 17, grid, model=model)
        np.testing.assert_array_equal(a.se_curve, b.se_curve)
        np.testing.assert_array_equal(a.curves, c.curves[:4])
        assert a.master_seed == 17 and a.replicate_count == 4

    def test_schedule_independent(self, instance, grid, monkeypatch):
        d1, d2, fit, model = instance
        serial = bootstrap_se(d1, d2, fit, 3, 5, grid, model=model, n_jobs=1)
        monkeypatch.setattr("os.cpu_count", lambda: 2)
        pooled = bootstrap_se(d1, d2, fit, 3, 5, grid, model=model, n_jobs=2)
        np.testing.assert_array_equal(serial.curves, pooled.curves)

    def test_se_is_two_pass_sample_sd(self, instance, grid):
        d1, d2, fit, model = instance
        res = bootstrap_se(d1, d2, fit, 4, 3, grid, model=model)
        curves = res.curves
        mean = curves.sum(axis=0) / curves.shape[0]
        two_pass = np.sqrt(((curves - mean) ** 2).sum(axis=0) / (curves.shape[0] - 1))
        np.testing.assert_allclose(res.se_curve, two_pass, rtol=1e-12, atol=1e-12)
        assert np.all(res.se_curve >= 0) and res.se_curve.shape == grid.shape

    def test_flags_points_outside_replicate_domain(self, instance):
        d1, d2, fit, model = instance
        lo, hi = fit.warp.domain
        res = bootstrap_se(d1, d2, fit, 3, 1, np.array([lo - 5, 0.5 * (lo + hi), hi + 5]),
                           model=model)
        np.testing.assert_array_equal(res.flagged_fraction, [1.0, 0.0, 1.0])

    def test_failed_replicates_are_counted(self, instance, grid, monkeypatch):
        d1, d2, fit, model = instance
        real = bs.fit_warp
        calls = {"n": 0}

        def flaky(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 2:
                raise DataError("synthetic failure")
            return real(*args, **kw)

        monkeypatch.setattr(bs, "fit_warp", flaky)
        res = bootstrap_se(d1, d2, fit, 4, 0, grid, model=model)
        assert res.failed_replicates == 1 and res.curves.shape[0] == 3

    def test_all_failed(self, instance, grid, monkeypatch):
        d1, d2, fit, model = instance

        def broken(*args, **kw):
            raise DataError("nope")

        monkeypatch.setattr(bs, "fit_warp", broken)
        with pytest.raises(ConvergenceError, match="all-replicates-failed"):
            bootstrap_se(d1, d2, fit, 3, 0, grid, model=model)

    def test_needs_two_replicates(self, instance, grid):
        d1, d2, fit, model = instance
        with pytest.raises(ValueError):
            bootstrap_se(d1, d2, fit, 1, 0, grid, model=model)


@pytest.fixture(scope="module")
def near_noiseless():
    """Fixed-design instance whose noise SD is 1e-6 of the signal SD."""
    d1, d2, _ = gen_run(ScenarioSpec(1, n1=100, n2=100, noise_factor=1e-6), 0)
    fit = fit_warp(d1, d2)
    grid = np.linspace(40, 360, 81)
    reference = bootstrap_se(d1, d2, fit, 500, 2, grid)
    return fit, reference


@pytest.mark.slow
def test_fifty_replicates_track_a_long_run(near_noiseless):
    _, reference = near_noiseless
    short = reference.curves[:50].std(axis=0, ddof=1)
    ratio = short / reference.se_curve
    assert reference.failed_replicates == 0
    assert np.all((ratio > 0.5) & (ratio < 2.0))


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=(
    "replicate designs are redrawn from the time KDE, and with n = 100 random designs the "
    "criterion itself prefers warps several h_t away from the truth, so the SE stays above h_t"))
def test_near_noiseless_se_below_time_bandwidth(near_noiseless):
    fit, reference = near_noiseless
    assert reference.curves[:50].std(axis=0, ddof=1).max() < fit.bandwidths.h_t
