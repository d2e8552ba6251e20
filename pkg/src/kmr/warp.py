"""Monotone piecewise-linear warping functions.

A warp is a continuous, strictly increasing linear B-spline on a closed
interval ``[lo, hi]`` with equidistant knots.  It is stored by its values
at the knots; for linear splines these coincide with the B-spline
coefficients, and monotonicity reduces to an increasing-sequence check.
"""

from __future__ import annotations

import json
import math
from typing import Callable

import numpy as np

from .errors import DataError, DomainError

#: Smallest admissible slope between consecutive knots.
MIN_SLOPE = 1e-6

_KNOT_RTOL = 1e-9


def _as_readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


class WarpFunction:
    """Strictly increasing linear spline on equidistant knots.

    Parameters
    ----------
    knots : array_like
        Equidistant, strictly increasing knot locations.  The first and last
        knot define the domain.
    values : array_like
        Warped time at each knot.

    Raises
    ------
    DataError
        If the knots are not equidistant or the values violate the slope
        floor ``MIN_SLOPE``.
    """

    __slots__ = ("knots", "values")

    def __init__(self, knots, values):
        knots = _as_readonly(knots)
        values = _as_readonly(values)
        if knots.ndim != 1 or knots.size < 2:
            raise DataError("a warp needs at least two knots")
        if values.shape != knots.shape:
            raise DataError("knots and values must have the same length")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise DataError("knots and values must be finite")
        gaps = np.diff(knots)
        if np.any(gaps <= 0):
            raise DataError("knots must be strictly increasing")
        spacing = (knots[-1] - knots[0]) / (knots.size - 1)
        if np.any(np.abs(gaps - spacing) > _KNOT_RTOL * spacing):
            raise DataError("knots must be equidistant")
        if not _slopes_ok(knots, values):
            raise DataError(f"warp values must increase with slope >= {MIN_SLOPE}")
        self.knots = knots
        self.values = values

    @classmethod
    def from_values(cls, domain_lo: float, domain_hi: float, values) -> "WarpFunction":
        """Build a warp on ``[domain_lo, domain_hi]`` from its knot values."""
        values = np.asarray(values, dtype=float)
        return cls(_equidistant_knots(domain_lo, domain_hi, values.size - 1), values)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def n_segments(self) -> int:
        return self.knots.size - 1

    @property
    def spacing(self) -> float:
        lo, hi = self.domain
        return (hi - lo) / self.n_segments

    def __call__(self, t):
        return eval_warp(self, t)

    def __eq__(self, other):
        if not isinstance(other, WarpFunction):
            return NotImplemented
        return np.array_equal(self.knots, other.knots) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return hash((self.knots.tobytes(), self.values.tobytes()))

    def __repr__(self):
        lo, hi = self.domain
        return f"WarpFunction(domain=({lo:g}, {hi:g}), n_segments={self.n_segments})"

    def to_dict(self) -> dict:
        lo, hi = self.domain
        return {
            "domain": [lo, hi],
            "knots": [float(k) for k in self.knots],
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "WarpFunction":
        try:
            lo, hi = obj["domain"]
            knots, values = obj["knots"], obj["values"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed warp object: {exc}") from None
        warp = cls(knots, values)
        if warp.domain != (float(lo), float(hi)):
            raise DataError("warp 'domain' disagrees with its first/last knot")
        return warp

    def to_json(self) -> str:
        # json emits floats via repr, i.e. shortest round-trip decimals
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "WarpFunction":
        return cls.from_dict(json.loads(text))


class ClosedFormWarp:
    """Exact warp given by a formula, restricted to ``[lo, hi]``.

    Used for simulation truths, which must not carry spline
    representation error.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], domain_lo: float,
                 domain_hi: float, name: str = ""):
        if not domain_hi > domain_lo:
            raise DomainError("invalid-domain: need domain_hi > domain_lo")
        self.func = func
        self.domain = (float(domain_lo), float(domain_hi))
        self.name = name

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        _check_in_domain(t_arr, *self.domain)
        out = self.func(t_arr)
        return float(out) if np.ndim(t) == 0 else out

    def __repr__(self):
        return f"ClosedFormWarp({self.name!r}, domain={self.domain})"


def _equidistant_knots(lo: float, hi: float, n_segments: int) -> np.ndarray:
    knots = np.linspace(lo, hi, n_segments + 1)
    knots[-1] = hi
    return knots


def _slopes_ok(knots: np.ndarray, values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) / np.diff(knots) >= MIN_SLOPE))


def _check_in_domain(t: np.ndarray, lo: float, hi: float) -> None:
    if t.size and (np.any(~np.isfinite(t)) or t.min() < lo or t.max() > hi):
        raise DomainError(f"out-of-domain: evaluation point outside [{lo:g}, {hi:g}]")


def identity_warp(domain_lo: float, domain_hi: float, n_segments: int) -> WarpFunction:
    """Identity map on ``[domain_lo, domain_hi]`` with ``n_segments`` pieces."""
    if not domain_hi > domain_lo:
        raise DomainError("invalid-domain: need domain_hi > domain_lo")
    if int(n_segments) != n_segments or n_segments < 1:
        raise DataError("invalid-segments: n_segments must be a positive integer")
    knots = _equidistant_knots(domain_lo, domain_hi, int(n_segments))
    return WarpFunction(knots, knots)


def segment_coordinates(w: WarpFunction, t) -> tuple[np.ndarray, np.ndarray]:
    """Locate each ``t`` on the knot grid.

    Returns the left-knot index of the segment containing each point and the
    fractional position within it, so that
    ``w(t) = (1 - frac) * values[idx] + frac * values[idx + 1]``.
    Points lying exactly on a knot get ``frac == 0`` (``frac == 1`` at the
    right end of the domain), which makes knot evaluation exact.
    """
    t = np.asarray(t, dtype=float)
    _check_in_domain(t, *w.domain)
    idx = np.searchsorted(w.knots, t, side="right") - 1
    idx = np.clip(idx, 0, w.n_segments - 1)
    left = w.knots[idx]
    frac = (t - left) / (w.knots[idx + 1] - left)
    return idx, frac


def eval_warp(w: WarpFunction, t):
    """Evaluate ``w`` at scalar or array ``t`` by linear interpolation."""
    idx, frac = segment_coordinates(w, t)
    out = (1.0 - frac) * w.values[idx] + frac * w.values[idx + 1]
    return float(out) if np.ndim(t) == 0 else out


def clamped_eval(w, grid) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``w`` on ``grid`` after clamping into its domain.

    Returns the values and a mask of the clamped points.
    """
    lo, hi = w.domain
    flagged = (grid < lo) | (grid > hi)
    return np.asarray(w(np.clip(grid, lo, hi)), dtype=float), flagged


def sup_distance(w1: WarpFunction, w2: WarpFunction) -> float:
    """Sup-norm distance between two warps on their common domain.

    Both are piecewise linear, so the maximum of ``|w1 - w2|`` is attained
    on the union of their knots.
    """
    if w1.domain != w2.domain:
        raise DomainError("domain-mismatch: warps live on different intervals")
    pts = np.union1d(w1.knots, w2.knots)
    return float(np.max(np.abs(eval_warp(w1, pts) - eval_warp(w2, pts))))


def perturb_coefficient(w: WarpFunction, index: int, new_value: float) -> WarpFunction | None:
    """Copy of ``w`` with one knot value replaced.

    Returns ``None`` when the change would break monotonicity (a rejection,
    not an error).
    """
    if not 0 <= index < w.knots.size:
        raise IndexError(f"index-out-of-range: {index} not in [0, {w.knots.size})")
    if not math.isfinite(new_value):
        return None
    values = w.values.copy()
    values[index] = new_value
    if not _slopes_ok(w.knots, values):
        return None
    return WarpFunction(w.knots, values)


def project_onto_knots(f: Callable, domain_lo: float, domain_hi: float,
                       n_segments: int) -> WarpFunction:
    """Linear-spline interpolant of ``f`` at equidistant knots."""
    knots = _equidistant_knots(domain_lo, domain_hi, n_segments)
    return WarpFunction(knots, np.asarray(f(knots), dtype=float))


def _hinge_warp(t):
    t = np.asarray(t, dtype=float)
    return (0.95 * t + 0.2 * np.maximum(t - 80, 0) - 0.4 * np.maximum(t - 160, 0)
            + 0.6 * np.maximum(t - 240, 0) - 0.55 * np.maximum(t - 320, 0))


def _sine_warp(t):
    t = np.asarray(t, dtype=float)
    return t + 0.05 * t * np.sin(4 * np.pi * t / 400)


def hinge_truth_warp() -> ClosedFormWarp:
    """Piecewise-linear truth on [0, 400] with kinks at 80, 160, 240, 320."""
    return ClosedFormWarp(_hinge_warp, 0.0, 400.0, name="hinge")


def sine_truth_warp() -> ClosedFormWarp:
    """Oscillating truth ``t + 0.05 t sin(pi t / 100)`` on [0, 400]."""
    return ClosedFormWarp(_sine_warp, 0.0, 400.0, name="sine")
