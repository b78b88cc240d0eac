"""Local hot/cold spot statistic (Getis-Ord Gi*) over a ratio field.

For every occupied bin i the statistic z-scores the neighborhood sum of the
field against its global moments:

    z_i = (sum_j w_ij x_j - xbar * W_i) /
          (s * sqrt((n * W_i - W_i^2) / (n - 1)))

with binary weights (W_i the neighborhood size, self included),
xbar = sum(x) / n and s = sqrt(sum(x^2) / n - xbar^2), all sums running
over the n occupied bins. Bins without data never enter the computation.
"""

from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ndtr, ndtri

from . import kernels
from .cube import RatioField
from .grid import BinIndex, GridSpec
from .weights import WeightScheme, WeightsSpec, stencil_offsets

__all__ = [
    "SpotClass",
    "GiResult",
    "GiField",
    "gi_star",
    "classify_spot",
    "critical_z",
    "fdr_correct",
]


class SpotClass(IntEnum):
    """Per-bin significance class; NO_DATA only ever appears in histories."""

    NO_DATA = -2
    COLD = -1
    NOT_SIGNIFICANT = 0
    HOT = 1


class GiResult(NamedTuple):
    bin: BinIndex
    z: float
    p: float
    spot_class: SpotClass


class GiField(Sequence):
    """Result of :func:`gi_star`: one record per occupied bin.

    Acts as a sequence of :class:`GiResult` ordered by row-major bin id,
    but keeps the underlying arrays (`bins`, `z`, `p`, `classes`)
    accessible for bulk consumers. ``degenerate`` is set when the input
    field was constant (zero variance), in which case every z is 0 and
    every bin NOT_SIGNIFICANT.
    """

    __slots__ = ("grid", "bins", "z", "p", "classes", "degenerate", "alpha")

    def __init__(self, grid, bins, z, p, classes, degenerate, alpha):
        self.grid = grid
        self.bins = bins
        self.z = z
        self.p = p
        self.classes = classes
        self.degenerate = degenerate
        self.alpha = alpha

    def __len__(self) -> int:
        return len(self.bins)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[t] for t in range(*k.indices(len(self)))]
        i, j = self.grid.unflatten(int(self.bins[k]))
        return GiResult(
            bin=BinIndex(int(i), int(j)),
            z=float(self.z[k]),
            p=float(self.p[k]),
            spot_class=SpotClass(int(self.classes[k])),
        )


def critical_z(alpha: float) -> float:
    """Two-tailed standard normal critical value for level ``alpha``."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must be in (0, 0.5], got {alpha}")
    return float(-ndtri(alpha / 2.0))


def classify_spot(z: float, alpha: float) -> SpotClass:
    """Hot/cold/not-significant verdict for one z-score (boundary inclusive)."""
    zc = critical_z(alpha)
    if z >= zc:
        return SpotClass.HOT
    if z <= -zc:
        return SpotClass.COLD
    return SpotClass.NOT_SIGNIFICANT


def _classify_array(z: np.ndarray, alpha: float) -> np.ndarray:
    zc = critical_z(alpha)
    out = np.zeros(len(z), dtype=np.int8)
    out[z >= zc] = SpotClass.HOT
    out[z <= -zc] = SpotClass.COLD
    return out


def p_values(z: np.ndarray) -> np.ndarray:
    """Two-tailed normal p-values, p = 2 * (1 - Phi(|z|))."""
    return 2.0 * ndtr(-np.abs(z))


def _knn_sums(bins, values, grid, k):
    """Neighbor count/sum for the deterministic k-nearest scheme.

    Candidates at the cutoff distance are re-ranked by exact squared
    index distance then flat id, so results do not depend on KD-tree
    internals.
    """
    n = len(bins)
    i = (bins % grid.nx).astype(np.float64)
    j = (bins // grid.nx).astype(np.float64)
    pts = np.column_stack([i, j])
    tree = cKDTree(pts)
    k_eff = min(k, n)
    dist, _ = tree.query(pts, k=k_eff)
    if k_eff == 1:
        dist = dist[:, None]
    d_max = dist[:, -1]
    balls = tree.query_ball_point(pts, r=d_max * (1.0 + 1e-12) + 1e-12)

    ii = bins % grid.nx
    jj = bins // grid.nx
    counts = np.full(n, k_eff, dtype=np.int64)
    sums = np.empty(n, dtype=np.float64)
    for t in range(n):
        cand = np.asarray(balls[t], dtype=np.int64)
        d2 = (ii[cand] - ii[t]) ** 2 + (jj[cand] - jj[t]) ** 2
        order = np.lexsort((bins[cand], d2))
        sums[t] = values[cand[order[:k_eff]]].sum()
    return counts, sums


def neighbor_stats(
    bins: np.ndarray, values: np.ndarray, grid: GridSpec, weights: WeightsSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin binary-weight neighborhood size and value sum."""
    if weights.scheme is WeightScheme.K_NEAREST:
        return _knn_sums(bins, values, grid, weights.k)
    offsets = stencil_offsets(weights)
    return kernels.neighbor_sums(bins, values, grid.nx, grid.ny, offsets)


def zscores(
    bins: np.ndarray, values: np.ndarray, grid: GridSpec, weights: WeightsSpec
) -> tuple[np.ndarray, bool]:
    """Gi* z-scores over the occupied bins; array counterpart of gi_star.

    Returns ``(z, degenerate)``. A constant field has no spatial structure
    to score; it yields all-zero z with the degenerate flag set instead of
    failing, so sparse yearly slices keep flowing through the pipeline.
    Bins whose neighborhood spans the entire support get z = 0 (the
    statistic is 0/0 there).
    """
    n = len(bins)
    if n < 2:
        raise ValueError(f"need at least 2 occupied bins, got {n}")
    x = np.asarray(values, dtype=np.float64)
    if x.max() == x.min():
        return np.zeros(n, dtype=np.float64), True
    xbar = float(x.mean())
    s = float(np.sqrt(np.var(x)))
    if s == 0.0:  # cancellation guard; effectively constant
        return np.zeros(n, dtype=np.float64), True

    counts, sums = neighbor_stats(bins, x, grid, weights)
    w = counts.astype(np.float64)
    u = (n * w - w * w) / (n - 1.0)
    denom = s * np.sqrt(np.maximum(u, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (sums - xbar * w) / denom
    z[denom == 0.0] = 0.0
    return z, False


def gi_star(
    field: RatioField, weights: WeightsSpec, alpha: float = 0.05
) -> GiField:
    """Getis-Ord Gi* over a ratio field.

    Parameters
    ----------
    field : RatioField
        Values over the occupied bins (needs n >= 2).
    weights : WeightsSpec
        Neighborhood scheme; binary weights, self always included.
    alpha : float
        Two-tailed level used to fill the per-bin spot class.

    Returns
    -------
    GiField
        One result per occupied bin, ordered by row-major bin id.
    """
    z, degenerate = zscores(field.bins, field.values, field.grid, weights)
    p = p_values(z)
    classes = _classify_array(z, alpha)
    return GiField(
        grid=field.grid,
        bins=field.bins,
        z=z,
        p=p,
        classes=classes,
        degenerate=degenerate,
        alpha=alpha,
    )


def bh_threshold(p: np.ndarray, alpha: float) -> float:
    """Benjamini-Hochberg step-up p-value cutoff (-inf if nothing passes)."""
    m = len(p)
    if m == 0:
        raise ValueError("empty p-value set")
    ps = np.sort(np.asarray(p, dtype=np.float64))
    passing = np.flatnonzero(ps <= alpha * np.arange(1, m + 1) / m)
    if len(passing) == 0:
        return -np.inf
    return float(ps[passing[-1]])


def fdr_correct(results, alpha: float):
    """Re-threshold spot classes with the Benjamini-Hochberg correction.

    Bins whose p-value exceeds the step-up cutoff drop to NOT_SIGNIFICANT;
    nothing is ever promoted to significant. Accepts and returns either a
    :class:`GiField` or a plain sequence of :class:`GiResult`.
    """
    if isinstance(results, GiField):
        thr = bh_threshold(results.p, alpha)
        classes = np.where(results.p <= thr, results.classes, 0).astype(np.int8)
        return GiField(
            grid=results.grid,
            bins=results.bins,
            z=results.z,
            p=results.p,
            classes=classes,
            degenerate=results.degenerate,
            alpha=results.alpha,
        )
    results = list(results)
    if not results:
        raise ValueError("empty result sequence")
    thr = bh_threshold(np.array([r.p for r in results]), alpha)
    return [
        r if r.p <= thr else r._replace(spot_class=SpotClass.NOT_SIGNIFICANT)
        for r in results
    ]
