"""Mann-Kendall trend test with tie correction and continuity-corrected z.

The test statistic is the signed pair count S = sum_{k<l} sgn(x_l - x_k);
its null variance with tie groups of sizes t_p is

    Var(S) = [n(n-1)(2n+5) - sum_p t_p(t_p-1)(2t_p+5)] / 18

and the normal approximation applies the +/-1 continuity correction:
z = (S-1)/sqrt(Var) for S > 0, 0 for S = 0, (S+1)/sqrt(Var) for S < 0.
"""

from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr

from . import kernels
from .gistar import critical_z

__all__ = ["Trend", "MKResult", "mann_kendall", "MIN_TREND_LENGTH"]

# below this many values the normal approximation is not trusted and the
# verdict is forced to NONE (the statistic itself is still reported)
MIN_TREND_LENGTH = 4


class Trend(IntEnum):
    DECREASING = -1
    NONE = 0
    INCREASING = 1


class MKResult(NamedTuple):
    """Outcome of the trend test on one series."""

    s: int
    var_s: float
    z: float
    p: float
    trend: Trend
    too_short: bool = False


def z_from_s(s, var_s):
    """Continuity-corrected normal score (array or scalar)."""
    s = np.asarray(s, dtype=np.float64)
    var_s = np.asarray(var_s, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(var_s)
        z = np.where(s > 0, (s - 1.0) / root, np.where(s < 0, (s + 1.0) / root, 0.0))
    return np.where(var_s == 0.0, 0.0, z)


def trend_from_z(z, alpha: float, n=None):
    """Two-tailed verdict codes at ``alpha`` for an array of z-scores.

    Boundary inclusive. Rows with fewer than MIN_TREND_LENGTH values (when
    ``n`` is given) are forced to NONE.
    """
    zc = critical_z(alpha)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    out = np.zeros(z.shape, dtype=np.int8)
    out[z >= zc] = Trend.INCREASING
    out[z <= -zc] = Trend.DECREASING
    if n is not None:
        out = np.where(np.atleast_1d(n) < MIN_TREND_LENGTH, 0, out).astype(np.int8)
    return out


def mann_kendall(series: Sequence[float], alpha: float = 0.05) -> MKResult:
    """Run the trend test on one series of finite values.

    Parameters
    ----------
    series : sequence of float
        At least 2 values; fewer raise. With fewer than MIN_TREND_LENGTH
        values the statistic is computed but the verdict is NONE and
        ``too_short`` is set.
    alpha : float
        Two-tailed significance level for the verdict.
    """
    x = np.asarray(list(series), dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError(f"series must have at least 2 values, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series values must be finite")

    s_arr, var_arr, _ = kernels.mk_batch(x[None, :], np.ones((1, n), dtype=bool))
    s = int(s_arr[0])
    var_s = float(var_arr[0])
    z = float(z_from_s(s, var_s))
    p = float(2.0 * ndtr(-abs(z)))
    too_short = n < MIN_TREND_LENGTH
    if too_short:
        trend = Trend.NONE
    else:
        trend = Trend(int(trend_from_z(z, alpha)[0]))
    return MKResult(s=s, var_s=var_s, z=z, p=p, trend=trend, too_short=too_short)
