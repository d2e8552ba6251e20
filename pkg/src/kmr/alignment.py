"""Kernel-matched alignment criterion.

For two datasets ``(t_i, y1_i)`` and ``(s_j, y2_j)`` and a candidate warp
``g`` the criterion is a ratio of double sums::

    N_n(g) = 1/(n1 n2) sum_ij  K1((t_i - g(s_j)) / h_t) / h_t * K2((y1_i - y2_j) / h_y) / h_y
    D_n(g) = 1/(n1 n2) sum_ij  K1((t_i - g(s_j)) / h_t) / h_t
    L_n(g) = N_n(g) / D_n(g)

i.e. a time-proximity weighted average of value-matching scores.  Its
population counterpart ``L(g)`` is computed by quadrature and serves as a
test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .dataset import FunctionalDataset
from .densities import DensityModel
from .errors import DomainError, ZeroDenominatorError
from .kernels import Bandwidths, KernelSpec, as_kernel, eval_kernel

#: Gaussian time weights beyond this many bandwidths are below 1e-14 and may be skipped.
TRUNCATION_RADIUS = 8.0


@dataclass(frozen=True)
class CriterionValue:
    l_n: float
    numerator: float
    denominator: float

    def as_dict(self) -> dict:
        return {"l_n": self.l_n, "numerator": self.numerator, "denominator": self.denominator}


class PairwiseTerms:
    """Per-source-point partial sums of the criterion.

    The value-matching scores do not depend on the warp, so they are
    computed once.  For warped source times ``g(s_j)`` the object returns,
    for each ``j``, ``sum_i K1(.)/h_t * score_ij`` and ``sum_i K1(.)/h_t``.
    The optimizer recomputes only the columns touched by a knot move.

    Parameters
    ----------
    truncate : bool
        Skip pairs with ``|t_i - g(s_j)| > 8 h_t``.  Only allowed for a
        Gaussian ``k1``.
    """

    def __init__(self, d1: FunctionalDataset, d2: FunctionalDataset,
                 k1=KernelSpec.GAUSSIAN, k2=KernelSpec.GAUSSIAN,
                 bw: Bandwidths | None = None, truncate: bool = False):
        if bw is None:
            raise ValueError("bandwidths are required")
        self.k1, self.k2 = as_kernel(k1), as_kernel(k2)
        if truncate and self.k1 is not KernelSpec.GAUSSIAN:
            raise ValueError("truncation is only valid for a gaussian time kernel")
        self.t = d1.times
        self.h_t, self.h_y = bw.h_t, bw.h_y
        self.n1, self.n2 = len(d1), len(d2)
        self.truncate = truncate
        diff = (d1.values[None, :] - d2.values[:, None]) / bw.h_y
        self.score = eval_kernel(self.k2, diff) / bw.h_y  # (n2, n1)

    def columns(self, warped: np.ndarray, rows=None) -> tuple[np.ndarray, np.ndarray]:
        """Partial sums for warped source times.

        ``warped`` has shape ``(..., A)`` where the trailing axis runs over
        the source points ``rows`` (all of them when ``rows`` is None).
        """
        score = self.score if rows is None else self.score[rows]
        if self.truncate:
            return self._truncated_columns(warped, score)
        k = eval_kernel(self.k1, (self.t - warped[..., None]) / self.h_t) / self.h_t
        return (k * score).sum(axis=-1), k.sum(axis=-1)

    def _truncated_columns(self, warped, score):
        reach = TRUNCATION_RADIUS * self.h_t
        lo = np.searchsorted(self.t, warped - reach, side="left")
        hi = np.searchsorted(self.t, warped + reach, side="right")
        width = int(np.max(hi - lo)) if warped.size else 0
        if width == 0:
            zeros = np.zeros(warped.shape)
            return zeros, zeros.copy()
        idx = lo[..., None] + np.arange(width)
        valid = idx < hi[..., None]
        idx = np.minimum(idx, self.t.size - 1)
        u = (self.t[idx] - warped[..., None]) / self.h_t
        k = np.where(valid, eval_kernel(self.k1, u), 0.0) / self.h_t
        s = np.take_along_axis(np.broadcast_to(score, warped.shape + (self.t.size,)), idx, axis=-1)
        return (k * s).sum(axis=-1), k.sum(axis=-1)

    def value(self, num_cols: np.ndarray, den_cols: np.ndarray) -> CriterionValue:
        scale = 1.0 / (self.n1 * self.n2)
        num = float(num_cols.sum()) * scale
        den = float(den_cols.sum()) * scale
        if den <= 0.0:
            raise ZeroDenominatorError("zero-denominator: no source point is near any target time")
        return CriterionValue(l_n=num / den, numerator=num, denominator=den)


def compute_criterion(d1: FunctionalDataset, d2: FunctionalDataset, w,
                      k1=KernelSpec.GAUSSIAN, k2=KernelSpec.GAUSSIAN,
                      bw: Bandwidths | None = None, truncate: bool = False) -> CriterionValue:
    """Evaluate the alignment criterion of ``d2`` warped by ``w`` against ``d1``.

    ``w`` is any callable warp (a :class:`~kmr.warp.WarpFunction` or a
    closed-form truth); it must be defined at every source time.
    """
    terms = PairwiseTerms(d1, d2, k1, k2, bw, truncate=truncate)
    warped = np.asarray(w(d2.times), dtype=float)
    return terms.value(*terms.columns(warped))


def naive_criterion(d1: FunctionalDataset, d2: FunctionalDataset, w,
                    k1=KernelSpec.GAUSSIAN, k2=KernelSpec.GAUSSIAN,
                    bw: Bandwidths | None = None) -> CriterionValue:
    """Literal double loop over all pairs; slow, used as a reference."""
    num = den = 0.0
    for t_i, y1_i in zip(d1.times, d1.values):
        for s_j, y2_j in zip(d2.times, d2.values):
            a = eval_kernel(k1, (t_i - float(w(s_j))) / bw.h_t) / bw.h_t
            b = eval_kernel(k2, (y1_i - y2_j) / bw.h_y) / bw.h_y
            num += a * b
            den += a
    scale = 1.0 / (len(d1) * len(d2))
    if den <= 0.0:
        raise ZeroDenominatorError("zero-denominator")
    return CriterionValue(num / den, num * scale, den * scale)


def _simpson_nodes(lo: float, hi: float, n_nodes: int) -> np.ndarray:
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number of nodes >= 3")
    return np.linspace(lo, hi, n_nodes)


def compute_limit_criterion(w, w0, m, f1: DensityModel, f2: DensityModel,
                            fe1: DensityModel, fe2: DensityModel,
                            n_nodes: int = 801, sd_span: float = 8.0) -> float:
    """Population alignment criterion ``L(g)`` by tensor-product Simpson rule.

    ``L(g) = N(g) / D(g)`` with::

        N(g) = int int f1(g(y)) f2(y) fe1(v - m(g(y)) + m(g0(y))) fe2(v) dy dv
        D(g) = int f1(g(y)) f2(y) dy

    ``y`` runs over the warp domain (clipped to the support of ``f2`` when
    known) and ``v`` over ``sd_span`` standard deviations of the error
    densities on either side of zero.
    """
    lo, hi = w.domain
    if tuple(w0.domain) != (lo, hi):
        raise DomainError("domain-mismatch: w and w0 live on different intervals")
    if f2.support is not None:
        lo, hi = max(lo, f2.support[0]), min(hi, f2.support[1])
        if not hi > lo:
            raise ZeroDenominatorError("zero-denominator: f2 support misses the warp domain")
    y = _simpson_nodes(lo, hi, n_nodes)
    reach = sd_span * max(fe1.std, fe2.std)
    v = _simpson_nodes(-reach, reach, n_nodes)

    gy = np.asarray(w(y), dtype=float)
    weight = f1.pdf(gy) * f2.pdf(y)
    den = simpson(weight, x=y)
    if den <= 0.0:
        raise ZeroDenominatorError("zero-denominator: f1(g(.)) and f2 do not overlap")
    shift = np.asarray(m(gy), dtype=float) - np.asarray(m(w0(y)), dtype=float)
    inner = simpson(fe1.pdf(v[None, :] - shift[:, None]) * fe2.pdf(v)[None, :], x=v, axis=1)
    num = simpson(weight * inner, x=y)
    return float(num / den)


def error_convolution(fe1: DensityModel, fe2: DensityModel, u, n_nodes: int = 4001,
                      sd_span: float = 10.0):
    """Density of ``e1 + e2`` at ``u`` by Simpson quadrature over ``e2``."""
    if fe2.support is not None:
        lo, hi = fe2.support
    else:
        lo, hi = -sd_span * fe2.std, sd_span * fe2.std
    v = _simpson_nodes(lo, hi, n_nodes)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    vals = simpson(fe1.pdf(u_arr[:, None] - v[None, :]) * fe2.pdf(v)[None, :], x=v, axis=1)
    return float(vals[0]) if np.ndim(u) == 0 else vals
