"""Container for one irregularly sampled series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """Observations ``(times[i], values[i])`` with strictly increasing times."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        if times.size != values.size:
            raise DataError("times and values must have equal length")
        if times.size < 1:
            raise DataError("empty-dataset: need at least one observation")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DataError("times and values must be finite")
        if np.any(np.diff(times) <= 0):
            raise DataError("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_unsorted(cls, times, values) -> "FunctionalDataset":
        """Sort by time first; duplicate times are still rejected."""
        times = np.asarray(times, dtype=float)
        order = np.argsort(times, kind="stable")
        return cls(times[order], np.asarray(values, dtype=float)[order])

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, FunctionalDataset):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def mean_gap(self) -> float:
        """Average spacing between consecutive times."""
        if len(self) < 2:
            raise DataError("too-few-points: need at least two observations")
        lo, hi = self.span
        return (hi - lo) / (len(self) - 1)
