"""Smoothing kernels and the default bandwidth rules."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dataset import FunctionalDataset
from .errors import DataError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class KernelSpec(str, enum.Enum):
    GAUSSIAN = "gaussian"
    EPANECHNIKOV = "epanechnikov"
    TRIANGULAR = "triangular"
    UNIFORM = "uniform"
    BIWEIGHT = "biweight"

    @property
    def compact(self) -> bool:
        return self is not KernelSpec.GAUSSIAN

    @property
    def variance(self) -> float:
        """Second moment of the kernel density."""
        return _VARIANCE[self]

    def __call__(self, u):
        return eval_kernel(self, u)


_VARIANCE = {
    KernelSpec.GAUSSIAN: 1.0,
    KernelSpec.EPANECHNIKOV: 1.0 / 5.0,
    KernelSpec.TRIANGULAR: 1.0 / 6.0,
    KernelSpec.UNIFORM: 1.0 / 3.0,
    KernelSpec.BIWEIGHT: 1.0 / 7.0,
}


def as_kernel(kind) -> KernelSpec:
    try:
        return KernelSpec(kind)
    except ValueError:
        names = ", ".join(k.value for k in KernelSpec)
        raise DataError(f"unknown kernel {kind!r}; expected one of {names}") from None


def eval_kernel(spec: KernelSpec, u):
    """Kernel density at ``u`` (scalar or array)."""
    spec = as_kernel(spec)
    a = np.asarray(u, dtype=float)
    if spec is KernelSpec.GAUSSIAN:
        out = _INV_SQRT_2PI * np.exp(-0.5 * a * a)
    else:
        x = np.abs(a)
        inside = x <= 1.0
        if spec is KernelSpec.EPANECHNIKOV:
            out = np.where(inside, 0.75 * (1.0 - x * x), 0.0)
        elif spec is KernelSpec.TRIANGULAR:
            out = np.where(inside, 1.0 - x, 0.0)
        elif spec is KernelSpec.UNIFORM:
            out = np.where(inside, 0.5, 0.0)
        else:
            out = np.where(inside, (15.0 / 16.0) * (1.0 - x * x) ** 2, 0.0)
    return float(out) if np.ndim(u) == 0 else out


def sample_kernel(spec: KernelSpec, rng: np.random.Generator, size) -> np.ndarray:
    """Draw variates whose density is the kernel."""
    spec = as_kernel(spec)
    if spec is KernelSpec.GAUSSIAN:
        return rng.standard_normal(size)
    if spec is KernelSpec.UNIFORM:
        return rng.uniform(-1.0, 1.0, size)
    if spec is KernelSpec.TRIANGULAR:
        return rng.uniform(0.0, 1.0, size) - rng.uniform(0.0, 1.0, size)
    if spec is KernelSpec.EPANECHNIKOV:
        # median of three uniforms on [-1, 1] has the Epanechnikov density
        shape = (size,) if np.ndim(size) == 0 else tuple(size)
        return np.median(rng.uniform(-1.0, 1.0, (3,) + shape), axis=0)
    # biweight: Beta(3, 3) on [0, 1] mapped to [-1, 1]
    return 2.0 * rng.beta(3.0, 3.0, size) - 1.0


@dataclass(frozen=True)
class Bandwidths:
    """Time and value bandwidths of the alignment criterion."""

    h_t: float
    h_y: float

    def __post_init__(self):
        for name in ("h_t", "h_y"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DataError(f"{name} must be positive and finite, got {v!r}")


def default_bandwidths(d1: FunctionalDataset, d2: FunctionalDataset) -> Bandwidths:
    """Rule-of-thumb bandwidths.

    ``h_t`` is half the mean time gap of the sparser dataset (dataset 1 on
    ties); ``h_y`` is 10% of the range of the pooled values.
    """
    if len(d1) < 2 or len(d2) < 2:
        raise DataError("too-few-points: each dataset needs at least two observations")
    gap1, gap2 = d1.mean_gap(), d2.mean_gap()
    h_t = 0.5 * (gap1 if gap1 >= gap2 else gap2)
    pooled = np.concatenate([d1.values, d2.values])
    spread = float(pooled.max() - pooled.min())
    if spread <= 0:
        raise DataError("degenerate-range: all pooled values are equal")
    return Bandwidths(h_t=h_t, h_y=0.1 * spread)
