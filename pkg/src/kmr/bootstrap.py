"""Smooth model-based bootstrap for the standard error of a fitted warp.

The fitted warp stands in for the truth, the pooled Nadaraya-Watson curve
for the mean, and kernel density estimates (bandwidth by likelihood
cross-validation) for the two time designs and the two error laws.
Replicate datasets are drawn from these ingredients and re-registered with
the original configuration.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .dataset import FunctionalDataset
from .densities import DensityModel, KernelDensity, kde_fit
from .errors import ConvergenceError, KMRError
from .kernels import Bandwidths
from .optimizer import FitConfig, FitResult, fit_warp
from .parallel import ordered_map
from .regression import NadarayaWatsonMean, nadaraya_watson_pooled, residuals
from .warp import clamped_eval

__all__ = [
    "BootstrapModel", "BootstrapResult", "DensityModel", "KernelDensity",
    "bootstrap_se", "build_model", "draw_replicate", "kde_fit", "replicate_rng",
]


@dataclass(frozen=True, eq=False)
class BootstrapModel:
    """Estimated ingredients shared read-only by all replicates."""

    warp: object
    mean: NadarayaWatsonMean
    f_target_times: KernelDensity
    f_source_times: KernelDensity
    f_target_errors: KernelDensity
    f_source_errors: KernelDensity
    n1: int
    n2: int


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    eval_grid: np.ndarray
    se_curve: np.ndarray
    replicate_count: int
    failed_replicates: int
    master_seed: int
    flagged_fraction: np.ndarray = field(repr=False, default=None)
    curves: np.ndarray = field(repr=False, default=None)


def build_model(d1: FunctionalDataset, d2: FunctionalDataset, fit: FitResult) -> BootstrapModel:
    m_hat = nadaraya_watson_pooled(d1, d2, fit.warp, "auto")
    r1 = residuals(d1, m_hat)
    r2 = residuals(d2, m_hat, fit.warp)
    return BootstrapModel(
        warp=fit.warp,
        mean=m_hat,
        # time densities are truncated to the observed spans so that source
        # draws stay inside the warp's domain
        f_target_times=kde_fit(d1.times, support=d1.span),
        f_source_times=kde_fit(d2.times, support=d2.span),
        f_target_errors=kde_fit(r1),
        f_source_errors=kde_fit(r2),
        n1=len(d1),
        n2=len(d2),
    )


def replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def draw_replicate(model: BootstrapModel, rng: np.random.Generator):
    """One bootstrap pair of datasets with the original sample sizes."""
    t = np.sort(model.f_target_times.sample(rng, model.n1))
    s = np.sort(model.f_source_times.sample(rng, model.n2))
    e1 = model.f_target_errors.sample(rng, model.n1)
    e2 = model.f_source_errors.sample(rng, model.n2)
    y1 = model.mean(t) + e1
    y2 = model.mean(model.warp(s)) + e2
    return FunctionalDataset(t, y1), FunctionalDataset(s, y2)


def _replicate(fixed, index):
    model, cfg, kernels, bw, master_seed, eval_grid = fixed
    try:
        b1, b2 = draw_replicate(model, replicate_rng(master_seed, index))
        refit = fit_warp(b1, b2, kernels[0], kernels[1], bw, cfg)
    except (KMRError, ArithmeticError, ValueError):
        return None
    return clamped_eval(refit.warp, eval_grid)


def bootstrap_se(d1: FunctionalDataset, d2: FunctionalDataset, fit: FitResult,
                 replicates: int, master_seed: int, eval_grid,
                 bandwidths: Bandwidths | str = "auto", n_jobs: int | None = None,
                 model: BootstrapModel | None = None) -> BootstrapResult:
    """Pointwise bootstrap standard error of ``fit.warp`` on ``eval_grid``.

    Each replicate is refitted with ``fit.config`` and ``fit.kernels``.
    With ``bandwidths="auto"`` the default bandwidth rule is re-applied to
    every replicate; pass a :class:`Bandwidths` to hold them fixed.
    Grid points outside a replicate warp's domain are clamped to it and
    counted in ``flagged_fraction``.  Replicates that fail are excluded and
    counted.

    Raises
    ------
    ConvergenceError
        If fewer than two replicates succeed.
    """
    if replicates < 2:
        raise ValueError("need at least two replicates")
    eval_grid = np.asarray(eval_grid, dtype=float)
    model = model or build_model(d1, d2, fit)
    bw = None if bandwidths == "auto" else bandwidths
    cfg = fit.config or FitConfig()
    task = functools.partial(_replicate, (model, cfg, fit.kernels, bw, master_seed, eval_grid))
    outcomes = ordered_map(task, range(replicates), n_jobs)
    good = [o for o in outcomes if o is not None]
    if len(good) < 2:
        raise ConvergenceError("all-replicates-failed: fewer than two replicates succeeded")
    curves = np.array([c for c, _ in good])
    flagged = np.mean([f for _, f in good], axis=0)
    return BootstrapResult(
        eval_grid=eval_grid,
        se_curve=curves.std(axis=0, ddof=1),
        replicate_count=replicates,
        failed_replicates=replicates - len(good),
        master_seed=master_seed,
        flagged_fraction=flagged,
        curves=curves,
    )
