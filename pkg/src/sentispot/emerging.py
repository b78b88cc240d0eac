"""Space-time hotspot pipeline: per-year Gi* slices, per-bin trend test,
and classification into the 17 emerging-pattern categories.

Category rules are evaluated over a bin's *data steps* (years with no
photos are dropped from both the percentages and the run structure), in a
fixed priority order, hot and cold polarity checked back to back for each
rule so that negating the field maps every category onto its mirror:

==================  =========================================================
new                 final step significant, never significant before
consecutive         final run of >= 2 significant steps, none before the
                    run, < 90% of steps significant
intensifying        >= 90% of steps significant incl. final, clustering
                    intensity trending up (down for cold) at alpha
persistent          >= 90% incl. final, no significant trend
diminishing         >= 90% incl. final, intensity trending down (up for cold)
historical          final step not significant, >= 90% of steps were
oscillating         final step significant, some prior step significant the
                    opposite way, < 90% of steps opposite-significant
sporadic            final step significant, < 90% of steps significant,
                    significant steps interrupted by insignificant ones,
                    never significant the opposite way
no pattern          anything else
==================  =========================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .cube import SpaceTimeCube
from .gistar import (
    SpotClass,
    _classify_array,
    bh_threshold,
    p_values,
    zscores,
)
from .grid import BinIndex
from .mannkendall import MIN_TREND_LENGTH, MKResult, Trend, trend_from_z, z_from_s
from . import kernels
from .weights import WeightsSpec

__all__ = [
    "EmergingPattern",
    "PATTERN_NAMES",
    "BinHistory",
    "EmergingConfig",
    "EmergingResult",
    "EmergingAnalysis",
    "yearly_slices",
    "classify_emerging",
    "emerging_analysis",
]


class EmergingPattern(IntEnum):
    """The 17 space-time categories; cold mirrors carry the negated code."""

    NO_PATTERN = 0
    NEW_HOT = 1
    CONSECUTIVE_HOT = 2
    INTENSIFYING_HOT = 3
    PERSISTENT_HOT = 4
    DIMINISHING_HOT = 5
    SPORADIC_HOT = 6
    OSCILLATING_HOT = 7
    HISTORICAL_HOT = 8
    NEW_COLD = -1
    CONSECUTIVE_COLD = -2
    INTENSIFYING_COLD = -3
    PERSISTENT_COLD = -4
    DIMINISHING_COLD = -5
    SPORADIC_COLD = -6
    OSCILLATING_COLD = -7
    HISTORICAL_COLD = -8

    @property
    def mirror(self) -> "EmergingPattern":
        return EmergingPattern(-self.value)


PATTERN_NAMES: dict[EmergingPattern, str] = {
    EmergingPattern.NO_PATTERN: "no_pattern",
    **{
        p: p.name.lower().replace("_hot", "_hot_spot").replace("_cold", "_cold_spot")
        for p in EmergingPattern
        if p is not EmergingPattern.NO_PATTERN
    },
}


@dataclass(frozen=True)
class BinHistory:
    """Per-year Gi* outcome of one bin across the time axis.

    ``z_series`` holds None for years without data; ``flag_series`` the
    matching spot class with :attr:`SpotClass.NO_DATA` for those years.
    """

    bin: BinIndex
    z_series: tuple
    flag_series: tuple

    def data_flags(self) -> list[SpotClass]:
        return [f for f in self.flag_series if f is not SpotClass.NO_DATA]

    def data_z(self) -> list[float]:
        return [z for z in self.z_series if z is not None]

    @property
    def n_data(self) -> int:
        return sum(1 for f in self.flag_series if f is not SpotClass.NO_DATA)


@dataclass(frozen=True)
class EmergingConfig:
    """Knobs of the space-time pipeline."""

    weights: WeightsSpec = field(default_factory=WeightsSpec)
    alpha: float = 0.05
    min_years: int = MIN_TREND_LENGTH
    fdr: bool = False


class EmergingResult(NamedTuple):
    pattern: EmergingPattern
    history: BinHistory
    trend: MKResult
    insufficient_data: bool


def _history_arrays(cube, label, weights, alpha, fdr):
    """Per-year slice computation over all occupied bins.

    Returns ``(bins, zmat, flagmat, degenerate_years)`` where zmat is NaN
    and flagmat NO_DATA for bin/years without photos. Years whose slice has
    fewer than two occupied bins contribute no data at all.
    """
    bins = cube.occupied_bins()
    steps = cube.time.year_count
    zmat = np.full((len(bins), steps), np.nan, dtype=np.float64)
    flagmat = np.full((len(bins), steps), int(SpotClass.NO_DATA), dtype=np.int8)
    degenerate_years = []
    lid = cube.label_id(label)
    for y in range(steps):
        fld = cube.ratio_field(lid, year=y)
        if fld.n < 2:
            continue
        z, degenerate = zscores(fld.bins, fld.values, cube.grid, weights)
        if degenerate:
            degenerate_years.append(y)
        classes = _classify_array(z, alpha)
        if fdr and not degenerate:
            thr = bh_threshold(p_values(z), alpha)
            classes = np.where(p_values(z) <= thr, classes, 0).astype(np.int8)
        pos = np.searchsorted(bins, fld.bins)
        zmat[pos, y] = z
        flagmat[pos, y] = classes
    return bins, zmat, flagmat, degenerate_years


def _history_features(flagmat: np.ndarray):
    """Vectorized per-bin rule features over the data-step subsequence."""
    rows, steps = flagmat.shape
    data = flagmat != int(SpotClass.NO_DATA)
    d = data.sum(axis=1).astype(np.int64)
    h = (flagmat == int(SpotClass.HOT)).sum(axis=1).astype(np.int64)
    c = (flagmat == int(SpotClass.COLD)).sum(axis=1).astype(np.int64)

    final = np.full(rows, int(SpotClass.NO_DATA), dtype=np.int8)
    seen = np.zeros(rows, dtype=bool)
    r_hot = np.zeros(rows, dtype=np.int64)
    r_cold = np.zeros(rows, dtype=np.int64)
    open_hot = np.ones(rows, dtype=bool)
    open_cold = np.ones(rows, dtype=bool)
    for y in range(steps - 1, -1, -1):
        m = data[:, y]
        f = flagmat[:, y]
        newly = m & ~seen
        final[newly] = f[newly]
        seen |= m
        is_hot = f == int(SpotClass.HOT)
        upd = m & open_hot
        r_hot[upd & is_hot] += 1
        open_hot[upd & ~is_hot] = False
        is_cold = f == int(SpotClass.COLD)
        upd = m & open_cold
        r_cold[upd & is_cold] += 1
        open_cold[upd & ~is_cold] = False
    return d, h, c, final, r_hot, r_cold


def _classify_batch(flagmat: np.ndarray, trend: np.ndarray) -> np.ndarray:
    """Rule table over feature arrays; returns EmergingPattern codes."""
    d, h, c, final, r_hot, r_cold = _history_features(flagmat)
    fin_hot = final == int(SpotClass.HOT)
    fin_cold = final == int(SpotClass.COLD)
    has_data = d > 0
    hot90 = 10 * h >= 9 * d
    cold90 = 10 * c >= 9 * d
    up = trend == int(Trend.INCREASING)
    down = trend == int(Trend.DECREASING)
    flat = trend == int(Trend.NONE)

    P = EmergingPattern
    conditions = [
        fin_hot & (h == 1),
        fin_cold & (c == 1),
        fin_hot & (r_hot >= 2) & (h == r_hot) & ~hot90,
        fin_cold & (r_cold >= 2) & (c == r_cold) & ~cold90,
        fin_hot & hot90 & up,
        fin_cold & cold90 & down,
        fin_hot & hot90 & flat,
        fin_cold & cold90 & flat,
        fin_hot & hot90 & down,
        fin_cold & cold90 & up,
        has_data & ~fin_hot & hot90,
        has_data & ~fin_cold & cold90,
        fin_hot & (c >= 1) & ~cold90,
        fin_cold & (h >= 1) & ~hot90,
        fin_hot & ~hot90 & (c == 0) & (h > r_hot),
        fin_cold & ~cold90 & (h == 0) & (c > r_cold),
    ]
    choices = [
        P.NEW_HOT, P.NEW_COLD,
        P.CONSECUTIVE_HOT, P.CONSECUTIVE_COLD,
        P.INTENSIFYING_HOT, P.INTENSIFYING_COLD,
        P.PERSISTENT_HOT, P.PERSISTENT_COLD,
        P.DIMINISHING_HOT, P.DIMINISHING_COLD,
        P.HISTORICAL_HOT, P.HISTORICAL_COLD,
        P.OSCILLATING_HOT, P.OSCILLATING_COLD,
        P.SPORADIC_HOT, P.SPORADIC_COLD,
    ]
    return np.select(conditions, [int(p) for p in choices], default=0).astype(np.int8)


def _trend_verdict(trend: MKResult, alpha: float) -> Trend:
    if trend.too_short:
        return Trend.NONE
    return Trend(int(trend_from_z(trend.z, alpha)[0]))


def classify_emerging(
    history: BinHistory, trend: MKResult, alpha: float = 0.05
) -> EmergingPattern:
    """Classify one bin's significance history into an emerging category.

    ``trend`` is the Mann-Kendall result over the bin's z-series (no-data
    years excluded); its verdict is re-derived here at ``alpha``.
    """
    df = history.data_flags()
    d = len(df)
    if d == 0:
        return EmergingPattern.NO_PATTERN
    h = sum(1 for f in df if f is SpotClass.HOT)
    c = sum(1 for f in df if f is SpotClass.COLD)
    final = df[-1]
    r_hot = 0
    for f in reversed(df):
        if f is not SpotClass.HOT:
            break
        r_hot += 1
    r_cold = 0
    for f in reversed(df):
        if f is not SpotClass.COLD:
            break
        r_cold += 1
    t = _trend_verdict(trend, alpha)

    fin_hot = final is SpotClass.HOT
    fin_cold = final is SpotClass.COLD
    hot90 = 10 * h >= 9 * d
    cold90 = 10 * c >= 9 * d

    P = EmergingPattern
    if fin_hot and h == 1:
        return P.NEW_HOT
    if fin_cold and c == 1:
        return P.NEW_COLD
    if fin_hot and r_hot >= 2 and h == r_hot and not hot90:
        return P.CONSECUTIVE_HOT
    if fin_cold and r_cold >= 2 and c == r_cold and not cold90:
        return P.CONSECUTIVE_COLD
    if fin_hot and hot90 and t is Trend.INCREASING:
        return P.INTENSIFYING_HOT
    if fin_cold and cold90 and t is Trend.DECREASING:
        return P.INTENSIFYING_COLD
    if fin_hot and hot90 and t is Trend.NONE:
        return P.PERSISTENT_HOT
    if fin_cold and cold90 and t is Trend.NONE:
        return P.PERSISTENT_COLD
    if fin_hot and hot90 and t is Trend.DECREASING:
        return P.DIMINISHING_HOT
    if fin_cold and cold90 and t is Trend.INCREASING:
        return P.DIMINISHING_COLD
    if not fin_hot and hot90:
        return P.HISTORICAL_HOT
    if not fin_cold and cold90:
        return P.HISTORICAL_COLD
    if fin_hot and c >= 1 and not cold90:
        return P.OSCILLATING_HOT
    if fin_cold and h >= 1 and not hot90:
        return P.OSCILLATING_COLD
    if fin_hot and not hot90 and c == 0 and h > r_hot:
        return P.SPORADIC_HOT
    if fin_cold and not cold90 and h == 0 and c > r_cold:
        return P.SPORADIC_COLD
    return P.NO_PATTERN


def _row_history(grid, time, bins, zmat, flagmat, row) -> BinHistory:
    i, j = grid.unflatten(int(bins[row]))
    z_series = tuple(
        None if np.isnan(zmat[row, y]) else float(zmat[row, y])
        for y in range(time.year_count)
    )
    flag_series = tuple(SpotClass(int(f)) for f in flagmat[row])
    return BinHistory(
        bin=BinIndex(int(i), int(j)), z_series=z_series, flag_series=flag_series
    )


def yearly_slices(
    cube: SpaceTimeCube,
    label,
    weights: WeightsSpec,
    alpha: float = 0.05,
    fdr: bool = False,
) -> list[BinHistory]:
    """Gi* per year slice, assembled into per-bin histories.

    Every bin occupied in any year appears once, with NO_DATA flags for its
    empty years (and for years whose whole slice had fewer than two
    occupied bins).
    """
    bins, zmat, flagmat, _ = _history_arrays(cube, label, weights, alpha, fdr)
    return [
        _row_history(cube.grid, cube.time, bins, zmat, flagmat, r)
        for r in range(len(bins))
    ]


class EmergingAnalysis(Mapping):
    """Mapping BinIndex -> :class:`EmergingResult`, array-backed.

    Results materialize lazily on access; bulk consumers (exports, tests)
    can read the underlying arrays directly. Iteration order is row-major
    bin id, so runs are reproducible record for record.
    """

    def __init__(self, cube, config, bins, zmat, flagmat, patterns,
                 mk_s, mk_var, mk_z, mk_p, trend, insufficient,
                 degenerate_years):
        self.grid = cube.grid
        self.time = cube.time
        self.config = config
        self.bins = bins
        self.zmat = zmat
        self.flagmat = flagmat
        self.patterns = patterns
        self.mk_s = mk_s
        self.mk_var = mk_var
        self.mk_z = mk_z
        self.mk_p = mk_p
        self.trend = trend
        self.insufficient = insufficient
        self.degenerate_years = degenerate_years

    def __len__(self) -> int:
        return len(self.bins)

    def __iter__(self) -> Iterator[BinIndex]:
        for flat in self.bins:
            i, j = self.grid.unflatten(int(flat))
            yield BinIndex(int(i), int(j))

    def _row(self, key) -> int:
        i, j = key
        flat = self.grid.flat_index(int(i), int(j))
        pos = int(np.searchsorted(self.bins, flat))
        if pos < len(self.bins) and self.bins[pos] == flat:
            return pos
        raise KeyError(key)

    def __getitem__(self, key) -> EmergingResult:
        r = self._row(key)
        nvalid = int((self.flagmat[r] != int(SpotClass.NO_DATA)).sum())
        mk = MKResult(
            s=int(self.mk_s[r]),
            var_s=float(self.mk_var[r]),
            z=float(self.mk_z[r]),
            p=float(self.mk_p[r]),
            trend=Trend(int(self.trend[r])),
            too_short=nvalid < MIN_TREND_LENGTH,
        )
        return EmergingResult(
            pattern=EmergingPattern(int(self.patterns[r])),
            history=_row_history(self.grid, self.time, self.bins,
                                 self.zmat, self.flagmat, r),
            trend=mk,
            insufficient_data=bool(self.insufficient[r]),
        )

    def pattern_counts(self) -> dict[EmergingPattern, int]:
        codes, counts = np.unique(self.patterns, return_counts=True)
        return {
            EmergingPattern(int(code)): int(cnt)
            for code, cnt in zip(codes, counts)
        }


def emerging_analysis(
    cube: SpaceTimeCube, label, config: Optional[EmergingConfig] = None
) -> EmergingAnalysis:
    """Full space-time pipeline for one label.

    Composes the per-year Gi* slices, the per-bin Mann-Kendall test over
    the z-series, and the category rules. Bins with fewer data years than
    ``config.min_years`` report NO_PATTERN with the insufficient-data flag.
    """
    config = config or EmergingConfig()
    bins, zmat, flagmat, degenerate_years = _history_arrays(
        cube, label, config.weights, config.alpha, config.fdr
    )
    valid = flagmat != int(SpotClass.NO_DATA)
    series = np.where(valid, zmat, 0.0)
    mk_s, mk_var, nvalid = kernels.mk_batch(series, valid)
    mk_z = z_from_s(mk_s, mk_var)
    mk_p = 2.0 * ndtr(-np.abs(mk_z))
    trend = trend_from_z(mk_z, config.alpha, n=nvalid)

    patterns = _classify_batch(flagmat, trend)
    insufficient = nvalid < config.min_years
    patterns[insufficient] = int(EmergingPattern.NO_PATTERN)

    return EmergingAnalysis(
        cube, config, bins, zmat, flagmat, patterns,
        mk_s, mk_var, mk_z, mk_p, trend, insufficient, degenerate_years,
    )
