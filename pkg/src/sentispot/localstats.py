"""Windowed yearly label-ratio series for a query region.

Regions are evaluated against the already-quantized cube: a bin belongs to
the query box when its center does (boundary inclusive), so results can
differ from a raw point-in-box count by at most the points sitting in
boundary bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cube import SpaceTimeCube

__all__ = ["RegionQuery", "YearlyRatioSeries", "local_ratio_series"]


@dataclass(frozen=True)
class RegionQuery:
    """Bounding box (degrees) plus the label of interest."""

    lon_min: float
    lat_min: float
    lon_max: float
    lat_max: float
    label: object  # label name or id; resolved against the cube vocab

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise ValueError(
                f"degenerate query bbox ({self.lon_min}, {self.lat_min}, "
                f"{self.lon_max}, {self.lat_max})"
            )


@dataclass(frozen=True)
class YearlyRatioSeries:
    """Per-year local ratio; None where the region had no photos that year.

    A no-data year is deliberately distinct from a 0.0 ratio: the first
    means no photos at all, the second means photos but none with the
    label.
    """

    years: tuple
    ratios: tuple
    denominators: tuple

    def data_items(self) -> list[tuple[int, float]]:
        return [(y, r) for y, r in zip(self.years, self.ratios) if r is not None]


def local_ratio_series(cube: SpaceTimeCube, query: RegionQuery) -> YearlyRatioSeries:
    """Yearly label ratio over all bins whose centers fall in the query box.

    Raises if the query box does not intersect the grid bbox.
    """
    g = cube.grid
    if (
        query.lon_min > g.lon_max
        or query.lon_max < g.lon_min
        or query.lat_min > g.lat_max
        or query.lat_max < g.lat_min
    ):
        raise ValueError(
            f"query bbox {query} does not intersect grid bbox {g.bbox}"
        )
    lid = cube.label_id(query.label)

    i = cube.bin_flat % g.nx
    j = cube.bin_flat // g.nx
    cx = g.lon_min + (i + 0.5) * g.bin_width
    cy = g.lat_min + (j + 0.5) * g.bin_height
    inside = (
        (cx >= query.lon_min)
        & (cx <= query.lon_max)
        & (cy >= query.lat_min)
        & (cy <= query.lat_max)
    )

    steps = cube.time.year_count
    counts = np.zeros(steps, dtype=np.int64)
    totals = np.zeros(steps, dtype=np.int64)
    np.add.at(counts, cube.year_idx[inside], cube.label_counts[inside, lid])
    np.add.at(totals, cube.year_idx[inside], cube.totals[inside])

    ratios = tuple(
        float(c) / float(t) if t > 0 else None for c, t in zip(counts, totals)
    )
    return YearlyRatioSeries(
        years=tuple(cube.time.years),
        ratios=ratios,
        denominators=tuple(int(t) for t in totals),
    )
