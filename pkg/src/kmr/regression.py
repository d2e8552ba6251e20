"""Mean-function models: closed-form curves and the pooled Nadaraya-Watson estimate."""

from __future__ import annotations

import numpy as np

from .dataset import FunctionalDataset
from .errors import DataError, DomainError, ZeroDenominatorError
from .kernels import KernelSpec, as_kernel, eval_kernel

_CHUNK = 1_000_000


class MeanFunction:
    kind = "closed_form"

    def __call__(self, t):
        raise NotImplementedError


class PiecewiseLinearMean(MeanFunction):
    """Continuous piecewise-linear curve through the given vertices."""

    kind = "closed_form"

    def __init__(self, vertex_t, vertex_y, name: str = ""):
        self.vertex_t = np.asarray(vertex_t, dtype=float)
        self.vertex_y = np.asarray(vertex_y, dtype=float)
        if self.vertex_t.size < 2 or np.any(np.diff(self.vertex_t) <= 0):
            raise DataError("vertices need at least two strictly increasing times")
        self.name = name

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.vertex_t[0]), float(self.vertex_t[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if t_arr.size and (t_arr.min() < lo or t_arr.max() > hi):
            raise DomainError(f"mean {self.name!r} is defined on [{lo:g}, {hi:g}] only")
        out = np.interp(t_arr, self.vertex_t, self.vertex_y)
        return float(out) if np.ndim(t) == 0 else out


class ConstantMean(MeanFunction):
    kind = "closed_form"

    def __init__(self, level: float):
        self.level = float(level)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.level
        return np.full(np.shape(t), self.level)


class NadarayaWatsonMean(MeanFunction):
    """Kernel-weighted local average of a pooled sample.

    Query points outside the hull of the pooled times are still answered
    (Gaussian weights never vanish) and can be identified with
    :meth:`extrapolated`.
    """

    kind = "nw_estimate"

    def __init__(self, times, values, bandwidth: float, kernel=KernelSpec.GAUSSIAN):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.size == 0:
            raise DataError("degenerate: pooled sample is empty")
        if self.times.shape != self.values.shape:
            raise DataError("pooled times and values differ in length")
        if not bandwidth > 0:
            raise DataError("bandwidth must be positive")
        self.bandwidth = float(bandwidth)
        self.kernel = as_kernel(kernel)

    @property
    def hull(self) -> tuple[float, float]:
        return float(self.times.min()), float(self.times.max())

    def extrapolated(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.hull
        return (t < lo) | (t > hi)

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
        out = np.empty(t_arr.size)
        step = max(1, _CHUNK // self.times.size)
        for start in range(0, t_arr.size, step):
            q = t_arr[start:start + step]
            w = _weights(self.kernel, (q[:, None] - self.times[None, :]) / self.bandwidth)
            den = w.sum(axis=1)
            if np.any(den <= 0):
                raise ZeroDenominatorError("zero-weight: no pooled observation near the query")
            out[start:start + step] = (w @ self.values) / den
        if np.ndim(t) == 0:
            return float(out[0])
        return out.reshape(np.shape(t))


def _weights(kernel: KernelSpec, u: np.ndarray) -> np.ndarray:
    """Kernel weights up to a per-row constant factor.

    For the Gaussian kernel each row is rescaled by its largest weight so
    that far-away queries do not underflow to zero.
    """
    if kernel is KernelSpec.GAUSSIAN:
        sq = 0.5 * u * u
        return np.exp(-(sq - sq.min(axis=1, keepdims=True)))
    return eval_kernel(kernel, u)


def pooled_sample(d1: FunctionalDataset, d2: FunctionalDataset | None, w=None):
    """Stack target times with warped source times, and their values."""
    if d2 is None or len(d2) == 0:
        return d1.times.copy(), d1.values.copy()
    warped = d2.times if w is None else np.asarray(w(d2.times), dtype=float)
    return np.concatenate([d1.times, warped]), np.concatenate([d1.values, d2.values])


def loocv_score(times, values, bandwidth: float, kernel=KernelSpec.GAUSSIAN) -> float:
    """Mean squared leave-one-out prediction error of Nadaraya-Watson."""
    x, y = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        return np.inf
    kernel = as_kernel(kernel)
    sse = 0.0
    step = max(1, _CHUNK // n)
    for start in range(0, n, step):
        rows = np.arange(start, min(start + step, n))
        u = (x[rows, None] - x[None, :]) / bandwidth
        if kernel is KernelSpec.GAUSSIAN:
            sq = 0.5 * u * u
            sq[np.arange(rows.size), rows] = np.inf
            w = np.exp(-(sq - sq.min(axis=1, keepdims=True)))
        else:
            w = eval_kernel(kernel, u)
            w[np.arange(rows.size), rows] = 0.0
        den = w.sum(axis=1)
        if np.any(den <= 0):
            return np.inf
        sse += float(np.sum((y[rows] - (w @ y) / den) ** 2))
    return sse / n


def loocv_bandwidth_grid(times, n_grid: int = 50) -> np.ndarray:
    x = np.asarray(times, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise DataError("degenerate: need at least two distinct pooled times")
    gap = float(np.ptp(x)) / (x.size - 1)
    return np.geomspace(0.1 * gap, 10.0 * gap, n_grid)


def nadaraya_watson_pooled(d1: FunctionalDataset, d2: FunctionalDataset | None, w=None,
                           bandwidth="auto", kernel=KernelSpec.GAUSSIAN) -> NadarayaWatsonMean:
    """Estimate the common mean from the target and the warped source.

    With ``bandwidth="auto"`` the bandwidth minimizes the pooled
    leave-one-out squared error over 50 log-spaced values between 0.1 and 10
    times the pooled mean time gap.
    """
    times, values = pooled_sample(d1, d2, w)
    if bandwidth == "auto":
        grid = loocv_bandwidth_grid(times)
        scores = np.array([loocv_score(times, values, h, kernel) for h in grid])
        if not np.any(np.isfinite(scores)):
            raise DataError("degenerate: leave-one-out error is undefined on the whole grid")
        bandwidth = float(grid[int(np.argmin(scores))])
    return NadarayaWatsonMean(times, values, float(bandwidth), kernel)


def residuals(d: FunctionalDataset, m, w=None) -> np.ndarray:
    """``y - m(t)`` for the target, or ``y - m(w(s))`` for a warped source."""
    times = d.times if w is None else np.asarray(w(d.times), dtype=float)
    return d.values - np.asarray(m(times), dtype=float)
