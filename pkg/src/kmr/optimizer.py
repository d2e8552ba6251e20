"""Maximization of the alignment criterion over monotone linear-spline warps.

The search is a cyclic coordinate ascent: each knot value in turn is set to
the best of a small grid of candidates centred on its current value.
Candidates that would break monotonicity are skipped, ties keep the
incumbent.  When a full sweep improves the criterion by less than
``rel_tol`` (relatively) the grid half-width shrinks; the search stops once
the half-width falls below ``MIN_SLOPE`` knot spacings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .alignment import CriterionValue, PairwiseTerms
from .dataset import FunctionalDataset
from .errors import DataError
from .kernels import Bandwidths, KernelSpec, as_kernel, default_bandwidths
from .warp import MIN_SLOPE, WarpFunction, identity_warp, segment_coordinates


@dataclass(frozen=True)
class FitConfig:
    """Knobs of the grid search.

    ``n_segments`` and ``initial_halfwidth`` accept ``"auto"``: the segment
    count then follows :func:`resolve_segments` and the half-width is one
    knot spacing.  ``restarts`` adds that many extra searches from jittered
    identity starts (seeded by ``seed``); the best criterion wins.
    """

    n_segments: int | str = "auto"
    rel_tol: float = 1e-4
    grid_points: int = 21
    max_sweeps: int = 200
    shrink_factor: float = 0.5
    initial_halfwidth: float | str = "auto"
    restarts: int = 0
    seed: int = 0
    truncate: bool = True

    def __post_init__(self):
        if self.n_segments != "auto" and (int(self.n_segments) != self.n_segments
                                          or self.n_segments < 1):
            raise DataError("n_segments must be a positive integer or 'auto'")
        if not self.rel_tol > 0:
            raise DataError("rel_tol must be positive")
        if self.grid_points < 3 or self.grid_points % 2 == 0:
            raise DataError("grid_points must be an odd integer >= 3")
        if self.max_sweeps < 1:
            raise DataError("max_sweeps must be positive")
        if not 0 < self.shrink_factor < 1:
            raise DataError("shrink_factor must lie in (0, 1)")
        if self.initial_halfwidth != "auto" and not self.initial_halfwidth > 0:
            raise DataError("initial_halfwidth must be positive or 'auto'")
        if self.restarts < 0:
            raise DataError("restarts must be non-negative")


@dataclass(frozen=True, eq=False)
class FitResult:
    warp: WarpFunction
    criterion: CriterionValue
    sweeps_used: int
    criterion_trace: np.ndarray
    converged: bool
    bandwidths: Bandwidths | None = None
    config: FitConfig | None = None
    kernels: tuple = (KernelSpec.GAUSSIAN, KernelSpec.GAUSSIAN)
    start_index: int = 0
    extra: dict = field(default_factory=dict)


def resolve_segments(d1: FunctionalDataset, d2: FunctionalDataset) -> int:
    """Ten times the fifth root of the smaller sample size, rounded."""
    n = min(len(d1), len(d2))
    if n < 1:
        raise DataError("empty-dataset")
    return int(math.floor(10.0 * n ** 0.2 + 0.5))


def _affected_rows(idx: np.ndarray, frac: np.ndarray, n_knots: int) -> list[np.ndarray]:
    """Source points whose warped time depends on each knot value."""
    rows = []
    for k in range(n_knots):
        touches = ((idx == k) & (frac < 1.0)) | ((idx == k - 1) & (frac > 0.0))
        rows.append(np.flatnonzero(touches))
    return rows


def _ascend(terms: PairwiseTerms, source_times: np.ndarray, start: WarpFunction,
            cfg: FitConfig):
    knots = start.knots
    n_knots = knots.size
    idx, frac = segment_coordinates(start, source_times)
    rows_of = _affected_rows(idx, frac, n_knots)
    values = start.values.copy()
    gaps = np.diff(knots)

    num_cols, den_cols = terms.columns((1.0 - frac) * values[idx] + frac * values[idx + 1])
    best = terms.value(num_cols, den_cols)
    trace = [best.l_n]
    scale = 1.0 / (terms.n1 * terms.n2)

    spacing = start.spacing
    halfwidth = spacing if cfg.initial_halfwidth == "auto" else float(cfg.initial_halfwidth)
    offsets = np.linspace(-1.0, 1.0, cfg.grid_points)
    offsets = offsets[offsets != 0.0]
    converged = False
    sweeps = 0

    while sweeps < cfg.max_sweeps:
        sweeps += 1
        before = best.l_n
        for k in range(n_knots):
            rows = rows_of[k]
            if rows.size == 0:
                continue
            cand = values[k] + halfwidth * offsets
            ok = np.ones(cand.size, dtype=bool)
            if k > 0:
                ok &= (cand - values[k - 1]) / gaps[k - 1] >= MIN_SLOPE
            if k < n_knots - 1:
                ok &= (values[k + 1] - cand) / gaps[k] >= MIN_SLOPE
            cand = cand[ok]
            if cand.size == 0:
                continue
            ri, rf = idx[rows], frac[rows]
            left = np.broadcast_to(values[ri], (cand.size, rows.size)).copy()
            right = np.broadcast_to(values[ri + 1], (cand.size, rows.size)).copy()
            left[:, ri == k] = cand[:, None]
            right[:, ri + 1 == k] = cand[:, None]
            nc, dc = terms.columns((1.0 - rf) * left + rf * right, rows)

            all_num = np.repeat(num_cols[None, :], cand.size, axis=0)
            all_den = np.repeat(den_cols[None, :], cand.size, axis=0)
            all_num[:, rows] = nc
            all_den[:, rows] = dc
            with np.errstate(divide="ignore", invalid="ignore"):
                score = (all_num.sum(axis=1) * scale) / (all_den.sum(axis=1) * scale)
            score = np.where(np.isfinite(score), score, -np.inf)
            pick = int(np.argmax(score))
            if score[pick] > best.l_n:
                values[k] = cand[pick]
                num_cols, den_cols = all_num[pick], all_den[pick]
                best = terms.value(num_cols, den_cols)
        trace.append(best.l_n)
        rel = (best.l_n - before) / abs(before) if before != 0 else math.inf
        if rel < cfg.rel_tol:
            halfwidth *= cfg.shrink_factor
            if halfwidth < MIN_SLOPE * spacing:
                converged = True
                break

    return WarpFunction(knots, values), best, sweeps, np.array(trace), converged


def _jittered_start(base: WarpFunction, rng: np.random.Generator) -> WarpFunction:
    half = 0.5 * base.spacing
    while True:
        values = base.values + rng.uniform(-half, half, base.values.size)
        if np.all(np.diff(values) / np.diff(base.knots) >= MIN_SLOPE):
            return WarpFunction(base.knots, values)


def fit_warp(d1: FunctionalDataset, d2: FunctionalDataset,
             k1=KernelSpec.GAUSSIAN, k2=KernelSpec.GAUSSIAN,
             bw: Bandwidths | None = None, cfg: FitConfig | None = None) -> FitResult:
    """Estimate the warp mapping source times ``d2.times`` onto target time.

    The search space is the set of monotone linear splines on
    ``[min(s), max(s)]``; the identity map is the first starting point.

    Returns
    -------
    FitResult
        ``converged`` is False when ``max_sweeps`` ran out before the grid
        half-width collapsed.
    """
    cfg = cfg or FitConfig()
    if len(d2) < 2:
        raise DataError("too-few-points: the source needs at least two observations")
    k1, k2 = as_kernel(k1), as_kernel(k2)
    bw = bw or default_bandwidths(d1, d2)
    n_segments = resolve_segments(d1, d2) if cfg.n_segments == "auto" else int(cfg.n_segments)
    lo, hi = d2.span
    start = identity_warp(lo, hi, n_segments)
    terms = PairwiseTerms(d1, d2, k1, k2, bw,
                          truncate=cfg.truncate and k1 is KernelSpec.GAUSSIAN)

    starts = [start]
    if cfg.restarts:
        rng = np.random.default_rng(cfg.seed)
        starts += [_jittered_start(start, rng) for _ in range(cfg.restarts)]

    best = None
    for i, s in enumerate(starts):
        warp, crit, sweeps, trace, converged = _ascend(terms, d2.times, s, cfg)
        if best is None or crit.l_n > best.criterion.l_n:
            best = FitResult(warp, crit, sweeps, trace, converged, bw, cfg, (k1, k2),
                             start_index=i)
    best.extra["n_segments"] = n_segments
    return best


def fit_direction(d1: FunctionalDataset, d2: FunctionalDataset, direction: str = "forward",
                  k1=KernelSpec.GAUSSIAN, k2=KernelSpec.GAUSSIAN, bw=None,
                  cfg: FitConfig | None = None, gap_grid: int = 1000):
    """Fit in the requested direction.

    ``"reverse"`` swaps the roles of the datasets; ``"best"`` fits both ways
    and keeps the one with the smaller post-alignment squared gap.

    Returns ``(fit, direction_used)``; for ``"reverse"`` the warp maps
    ``d1`` times onto the time scale of ``d2``.
    """
    from .metrics import mean_squared_gap

    if direction not in ("forward", "reverse", "best"):
        raise DataError(f"unknown direction {direction!r}")
    results = {}
    if direction in ("forward", "best"):
        results["forward"] = fit_warp(d1, d2, k1, k2, bw, cfg)
    if direction in ("reverse", "best"):
        results["reverse"] = fit_warp(d2, d1, k1, k2, bw, cfg)
    if direction != "best":
        return results[direction], direction
    fwd_gap = mean_squared_gap(d1, d2, results["forward"].warp, gap_grid)
    rev_gap = mean_squared_gap(d2, d1, results["reverse"].warp, gap_grid)
    chosen = "forward" if fwd_gap <= rev_gap else "reverse"
    return results[chosen], chosen


def with_overrides(cfg: FitConfig, **kw) -> FitConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
