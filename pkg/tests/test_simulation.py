import math

import numpy as np
import pytest
from scipy import integrate

from kmr.errors import ConvergenceError, DataError
from kmr.optimizer import FitConfig
from kmr.simulation import (SAWTOOTH7_VERTICES, ScenarioSpec, aggregate_curves, builtin_mean,
                            gen_run, reference_warp, run_study, signal_sd, true_warp)
from kmr.warp import ClosedFormWarp, WarpFunction


class TestMean:
    @pytest.mark.parametrize("t, expected", [(0, 0), (42.5, 4.5), (400, 2), (25, 8)])
    def test_sawtooth_values(self, t, expected):
        assert builtin_mean()(t) == pytest.approx(expected, abs=1e-12)

    def test_unknown_mean(self):
        with pytest.raises(DataError):
            builtin_mean("smooth")

    def test_signal_sd_matches_exact_integral(self):
        # on each linear piece the integrals of m and m**2 are closed form
        t, y = map(np.array, zip(*SAWTOOTH7_VERTICES))
        dt = np.diff(t)
        first = np.sum(dt * (y[:-1] + y[1:]) / 2)
        second = np.sum(dt * (y[:-1] ** 2 + y[:-1] * y[1:] + y[1:] ** 2) / 3)
        exact = math.sqrt(second / 400 - (first / 400) ** 2)
        assert signal_sd(builtin_mean()) == pytest.approx(exact, rel=1e-6)


class TestTruth:
    @pytest.mark.parametrize("sid, t, expected", [
        (1, 160, 168), (1, 400, 400), (2, 80, 76), (3, 100, 100), (3, 150, 142.5), (4, 50, 52.5),
    ])
    def test_values(self, sid, t, expected):
        assert true_warp(sid)(t) == pytest.approx(expected, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(DataError):
            true_warp(5)


class TestGeneration:
    def test_fixed_grid_spacing(self):
        d1, d2, _ = gen_run(ScenarioSpec(1), 0)
        assert np.diff(d1.times) == pytest.approx(400 / 249)
        assert d1.times[0] == 0 and d1.times[-1] == 400
        np.testing.assert_array_equal(d1.times, d2.times)

    @pytest.mark.parametrize("sid", [1, 3])
    def test_fixed_grid_shared_across_runs(self, sid):
        spec = ScenarioSpec(sid, n1=50, n2=50)
        a, _, _ = gen_run(spec, 0)
        b, _, _ = gen_run(spec, 7)
        np.testing.assert_array_equal(a.times, b.times)
        assert not np.array_equal(a.values, b.values)

    @pytest.mark.parametrize("sid", [2, 4])
    def test_random_design_is_fresh(self, sid):
        spec = ScenarioSpec(sid, n1=50, n2=40)
        a1, a2, _ = gen_run(spec, 0)
        b1, _, _ = gen_run(spec, 1)
        assert len(a1) == 50 and len(a2) == 40
        assert not np.array_equal(a1.times, b1.times)
        assert not np.array_equal(a1.times[:40], a2.times)
        assert 0 <= a1.times[0] and a1.times[-1] <= 400

    def test_zero_noise(self):
        spec = ScenarioSpec(2, n1=30, n2=30, noise_factor=0.0)
        d1, d2, g0 = gen_run(spec, 0)
        m = builtin_mean()
        np.testing.assert_array_equal(d1.values, m(d1.times))
        np.testing.assert_array_equal(d2.values, m(g0(d2.times)))

    def test_noise_level(self):
        spec = ScenarioSpec(1, n1=4000, n2=4000)
        d1, _, _ = gen_run(spec, 0)
        resid = d1.values - builtin_mean()(d1.times)
        assert resid.std() == pytest.approx(0.05 * signal_sd(builtin_mean()), rel=0.05)

    def test_deterministic(self):
        spec = ScenarioSpec(4, n1=20, n2=20, master_seed=3)
        assert gen_run(spec, 2)[0] == gen_run(spec, 2)[0]

    @pytest.mark.parametrize("kw", [{"scenario_id": 0}, {"n1": 1}, {"noise_factor": -0.1},
                                    {"runs": 0}])
    def test_spec_validation(self, kw):
        args = {"scenario_id": 1, **kw}
        with pytest.raises(DataError):
            ScenarioSpec(**args)


class TestAggregation:
    def test_perfect_recovery(self):
        grid = np.linspace(0, 1, 11)
        bias, sd, mse, imse = aggregate_curves(grid, np.tile(grid, (3, 1)), grid)
        np.testing.assert_allclose(bias, 0.0, atol=1e-15)
        np.testing.assert_allclose(mse, 0.0, atol=1e-30)
        assert imse == pytest.approx(0.0, abs=1e-30)

    def test_constant_offset_imse(self):
        grid = np.linspace(0, 1, 401)
        _, _, _, imse = aggregate_curves(grid, np.tile(grid + 0.1, (4, 1)), grid)
        assert imse == pytest.approx(0.03, rel=1e-12)

    def test_decomposition_and_conventions(self, rng):
        grid = np.linspace(0, 10, 21)
        curves = grid + rng.normal(size=(6, 21))
        bias, sd, mse, _ = aggregate_curves(grid, curves, grid)
        np.testing.assert_allclose(sd, np.std(curves, axis=0, ddof=1), rtol=1e-14)
        np.testing.assert_allclose(mse, bias ** 2 + 5 / 6 * sd ** 2, atol=1e-9)
        assert np.all(mse >= bias ** 2 - 1e-12)

    def test_imse_uses_simpson(self, rng):
        grid = np.linspace(0, 4, 9)
        curves = grid ** 2 + rng.normal(size=(3, 9))
        _, _, _, imse = aggregate_curves(grid, curves, grid ** 2)
        num = np.mean([integrate.simpson((c - grid ** 2) ** 2, x=grid) for c in curves])
        assert imse == pytest.approx(num / integrate.simpson(grid ** 4, x=grid), rel=1e-12)


class TestReferenceWarp:
    def test_hinge_projected_on_fitted_knots(self):
        fitted = WarpFunction.from_values(0, 400, np.linspace(0, 400, 31))
        ref = reference_warp(true_warp(1), 1, fitted)
        assert isinstance(ref, WarpFunction)
        np.testing.assert_array_equal(ref.knots, fitted.knots)

    def test_sine_used_in_closed_form(self):
        fitted = WarpFunction.from_values(0, 400, np.linspace(0, 400, 31))
        assert isinstance(reference_warp(true_warp(3), 3, fitted), ClosedFormWarp)


class TestStudy:
    @pytest.fixture(scope="class")
    @classmethod
    def study(cls):
        return run_study(ScenarioSpec(2, n1=60, n2=60, runs=4, master_seed=5),
                         FitConfig(n_segments=8), eval_grid_size=101)

    def test_shapes(self, study):
        assert study.curves.shape == (4, 101)
        assert study.criterion_pairs.shape == (4, 2)
        assert study.failed_runs == 0
        assert study.bias.shape == study.sd.shape == study.mse.shape == (101,)

    def test_decomposition(self, study):
        np.testing.assert_allclose(study.mse, study.bias ** 2 + 0.75 * study.sd ** 2,
                                   atol=1e-9, rtol=0)

    def test_summary(self, study):
        summary = study.summary()
        assert set(summary) == {"normalized_imse", "failed_runs", "successful_runs",
                                "missed_maximum_fraction", "median_sup_distance"}
        assert summary["successful_runs"] == 4
        assert 0 <= summary["missed_maximum_fraction"] <= 1

    def test_bit_reproducible(self, study):
        again = run_study(ScenarioSpec(2, n1=60, n2=60, runs=4, master_seed=5),
                          FitConfig(n_segments=8), eval_grid_size=101)
        np.testing.assert_array_equal(study.curves, again.curves)
        np.testing.assert_array_equal(study.criterion_pairs, again.criterion_pairs)
        assert study.normalized_imse == again.normalized_imse

    def test_grid_must_be_odd(self):
        with pytest.raises(DataError):
            run_study(ScenarioSpec(1, runs=1), eval_grid_size=400)

    def test_failing_runs_are_counted(self, monkeypatch):
        from kmr import simulation

        real = simulation.fit_warp
        calls = {"n": 0}

        def flaky(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 1:
                raise ArithmeticError("synthetic")
            return real(*args, **kw)

        monkeypatch.setattr(simulation, "fit_warp", flaky)
        res = run_study(ScenarioSpec(1, n1=40, n2=40, runs=3), FitConfig(n_segments=6),
                        eval_grid_size=41)
        assert res.failed_runs == 1 and res.curves.shape[0] == 2

    def test_all_runs_failing(self, monkeypatch):
        from kmr import simulation

        def broken(*args, **kw):
            raise DataError("synthetic")

        monkeypatch.setattr(simulation, "fit_warp", broken)
        with pytest.raises(ConvergenceError):
            run_study(ScenarioSpec(1, n1=40, n2=40, runs=2), eval_grid_size=41)
