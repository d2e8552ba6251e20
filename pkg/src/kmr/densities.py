"""Probability densities that can be both evaluated and sampled.

Closed-form laws drive the simulations and the limit-criterion oracle;
kernel density estimates drive the smooth bootstrap.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson
from scipy.special import ndtr

from .errors import DataError
from .kernels import KernelSpec, as_kernel, eval_kernel, sample_kernel

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class DensityModel:
    """Interface: ``pdf``, ``sample``, ``std`` and an optional ``support``."""

    support: tuple[float, float] | None = None

    def pdf(self, x):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def std(self) -> float:
        raise NotImplementedError

    def __call__(self, x):
        return self.pdf(x)


class GaussianDensity(DensityModel):
    def __init__(self, mean: float = 0.0, sd: float = 1.0):
        if not sd > 0:
            raise DataError("sd must be positive")
        self.mean, self.sd = float(mean), float(sd)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return _INV_SQRT_2PI / self.sd * np.exp(-0.5 * z * z)

    def sample(self, rng, size):
        return self.mean + self.sd * rng.standard_normal(size)

    @property
    def std(self):
        return self.sd

    def __repr__(self):
        return f"GaussianDensity(mean={self.mean:g}, sd={self.sd:g})"


class UniformDensity(DensityModel):
    def __init__(self, lo: float, hi: float):
        if not hi > lo:
            raise DataError("need hi > lo")
        self.lo, self.hi = float(lo), float(hi)
        self.support = (self.lo, self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    @property
    def std(self):
        return (self.hi - self.lo) / math.sqrt(12.0)


class TriangularDensity(DensityModel):
    """Symmetric triangular law on ``[center - half_width, center + half_width]``."""

    def __init__(self, center: float = 0.0, half_width: float = 1.0):
        if not half_width > 0:
            raise DataError("half_width must be positive")
        self.center, self.half_width = float(center), float(half_width)
        self.support = (self.center - self.half_width, self.center + self.half_width)

    def pdf(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.half_width
        return eval_kernel(KernelSpec.TRIANGULAR, u) / self.half_width

    def sample(self, rng, size):
        return self.center + self.half_width * sample_kernel(KernelSpec.TRIANGULAR, rng, size)

    @property
    def std(self):
        return self.half_width / math.sqrt(6.0)


class KernelDensity(DensityModel):
    """Kernel density estimate, optionally truncated to ``support``.

    With a support interval the estimate is renormalized to integrate to one
    on it, and sampling rejects draws that fall outside.
    """

    def __init__(self, sample, kernel=KernelSpec.GAUSSIAN, bandwidth: float = 1.0,
                 support: tuple[float, float] | None = None):
        self.data = np.array(sample, dtype=float)
        self.data.setflags(write=False)
        self.kernel = as_kernel(kernel)
        if not (math.isfinite(bandwidth) and bandwidth > 0):
            raise DataError("KDE bandwidth must be positive")
        self.bandwidth = float(bandwidth)
        self.support = None if support is None else (float(support[0]), float(support[1]))
        self._mass = 1.0 if support is None else self._support_mass()

    def _support_mass(self) -> float:
        lo, hi = self.support
        if self.kernel is KernelSpec.GAUSSIAN:
            z_hi = (hi - self.data) / self.bandwidth
            z_lo = (lo - self.data) / self.bandwidth
            mass = float(np.mean(ndtr(z_hi) - ndtr(z_lo)))
        else:
            grid = np.linspace(lo, hi, 4001)
            mass = float(simpson(self._raw_pdf(grid), x=grid))
        if mass <= 0:
            raise DataError("KDE has no mass inside its support")
        return mass

    def _raw_pdf(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        step = max(1, 2_000_000 // max(self.data.size, 1))
        flat, res = x.ravel(), out.ravel()
        for start in range(0, flat.size, step):
            chunk = flat[start:start + step]
            u = (chunk[:, None] - self.data[None, :]) / self.bandwidth
            res[start:start + step] = eval_kernel(self.kernel, u).mean(axis=1) / self.bandwidth
        return out

    def pdf(self, x):
        out = self._raw_pdf(x) / self._mass
        if self.support is not None:
            xa = np.atleast_1d(np.asarray(x, dtype=float))
            out = np.where((xa >= self.support[0]) & (xa <= self.support[1]), out, 0.0)
        return float(out[0]) if np.ndim(x) == 0 else out

    def sample(self, rng, size):
        out = self._draw(rng, size)
        if self.support is None:
            return out
        lo, hi = self.support
        bad = (out < lo) | (out > hi)
        while np.any(bad):
            out[bad] = self._draw(rng, int(bad.sum()))
            bad = (out < lo) | (out > hi)
        return out

    def _draw(self, rng, size):
        centers = self.data[rng.integers(0, self.data.size, size)]
        return centers + self.bandwidth * sample_kernel(self.kernel, rng, size)

    @property
    def std(self):
        if self.support is not None:
            lo, hi = self.support
            pad = 8 * self.bandwidth
            grid = np.linspace(lo - pad, hi + pad, 8001)
            p = self.pdf(grid)
            mu = simpson(grid * p, x=grid)
            return float(math.sqrt(simpson((grid - mu) ** 2 * p, x=grid)))
        return float(math.sqrt(self.data.var() + self.kernel.variance * self.bandwidth ** 2))

    def __repr__(self):
        return (f"KernelDensity(n={self.data.size}, kernel={self.kernel.value}, "
                f"bandwidth={self.bandwidth:.6g})")


def loo_log_likelihood(sample, bandwidth: float, kernel=KernelSpec.GAUSSIAN) -> float:
    """Leave-one-out log-likelihood of a KDE at the given bandwidth."""
    x = np.asarray(sample, dtype=float)
    n = x.size
    total = 0.0
    step = max(1, 1_000_000 // n)
    for start in range(0, n, step):
        rows = x[start:start + step]
        k = eval_kernel(kernel, (rows[:, None] - x[None, :]) / bandwidth)
        k[np.arange(rows.size), np.arange(start, start + rows.size)] = 0.0
        dens = k.sum(axis=1) / ((n - 1) * bandwidth)
        with np.errstate(divide="ignore"):
            total += float(np.sum(np.log(dens)))
    return total


def kde_bandwidth_grid(sample, n_grid: int = 50) -> np.ndarray:
    sd = float(np.std(sample, ddof=1))
    return np.geomspace(0.05 * sd, 5.0 * sd, n_grid)


def kde_fit(sample, kernel=KernelSpec.GAUSSIAN,
            support: tuple[float, float] | None = None) -> KernelDensity:
    """KDE with bandwidth chosen by likelihood cross-validation.

    Searches 50 log-spaced bandwidths between 0.05 and 5 sample standard
    deviations and keeps the one with the largest leave-one-out
    log-likelihood (smallest bandwidth on ties).
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 2:
        raise DataError("degenerate-sample: need at least two points")
    if not np.all(np.isfinite(x)):
        raise DataError("degenerate-sample: non-finite values")
    if np.ptp(x) == 0:
        raise DataError("degenerate-sample: zero variance")
    grid = kde_bandwidth_grid(x)
    scores = np.array([loo_log_likelihood(x, h, kernel) for h in grid])
    best = int(np.argmax(scores))
    return KernelDensity(x, kernel, float(grid[best]), support=support)
