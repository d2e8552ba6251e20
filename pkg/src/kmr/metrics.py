"""Average squared difference between two linearly interpolated series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FunctionalDataset
from .errors import DataError


@dataclass(frozen=True)
class AlignmentReport:
    pre_gap: float
    post_gap: float
    grid_size: int
    overlap_interval: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "pre_gap": self.pre_gap,
            "post_gap": self.post_gap,
            "grid_size": self.grid_size,
            "overlap_interval": list(self.overlap_interval),
        }


def overlap_interval(d1: FunctionalDataset, d2: FunctionalDataset, w=None) -> tuple[float, float]:
    """Intersection of the target span and the (warped) source span."""
    warped = d2.times if w is None else np.asarray(w(d2.times), dtype=float)
    lo = max(float(d1.times[0]), float(warped[0]))
    hi = min(float(d1.times[-1]), float(warped[-1]))
    if not hi > lo:
        raise DataError("no-overlap: the two series share no time interval")
    return lo, hi


def mean_squared_gap(d1: FunctionalDataset, d2: FunctionalDataset, w=None,
                     grid_size: int = 1000) -> float:
    """Mean of ``(y1(t) - y2(t))**2`` over a uniform grid on the overlap.

    Both series are linearly interpolated; the source is placed at its
    warped times ``w(s_j)`` (as observed when ``w`` is None).
    """
    if grid_size < 2:
        raise DataError("grid_size must be at least 2")
    warped = d2.times if w is None else np.asarray(w(d2.times), dtype=float)
    lo, hi = overlap_interval(d1, d2, w)
    grid = np.linspace(lo, hi, grid_size)
    diff = np.interp(grid, d1.times, d1.values) - np.interp(grid, warped, d2.values)
    return float(np.mean(diff * diff))


def alignment_report(d1: FunctionalDataset, d2: FunctionalDataset, w,
                     grid_size: int = 1000) -> AlignmentReport:
    return AlignmentReport(
        pre_gap=mean_squared_gap(d1, d2, None, grid_size),
        post_gap=mean_squared_gap(d1, d2, w, grid_size),
        grid_size=grid_size,
        overlap_interval=overlap_interval(d1, d2, w),
    )
