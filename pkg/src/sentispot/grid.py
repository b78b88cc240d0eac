"""Planar grid geometry, the yearly time axis, and point records.

The study area is treated as a flat rectangle in lon/lat degrees
(equirectangular): at the bin scales this library targets, projection
distortion is far below the bin size, so no map projection is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "OutOfBoundsError",
    "BinIndex",
    "GridSpec",
    "TimeAxis",
    "LabeledPoint",
    "PointBatch",
]

EPOCH_YEAR = 1970


class OutOfBoundsError(ValueError):
    """A coordinate falls outside the grid bounding box."""


class BinIndex(NamedTuple):
    """Column/row index of one grid bin: ``i`` along lon, ``j`` along lat."""

    i: int
    j: int


class LabeledPoint(NamedTuple):
    """One geotagged, timestamped observation carrying a categorical label.

    ``timestamp`` is a UTC instant in integer Unix seconds; ``label`` is the
    integer id of the label in the run's vocabulary.
    """

    lon: float
    lat: float
    timestamp: int
    label: int


@dataclass(frozen=True)
class GridSpec:
    """A bounding box split into ``nx`` x ``ny`` equal rectangular bins.

    Parameters
    ----------
    lon_min, lat_min, lon_max, lat_max : float
        Bounding box in degrees, min strictly below max on both axes.
    nx, ny : int
        Bin counts along longitude and latitude.
    """

    lon_min: float
    lat_min: float
    lon_max: float
    lat_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise ValueError(
                f"degenerate bbox ({self.lon_min}, {self.lat_min}, "
                f"{self.lon_max}, {self.lat_max})"
            )
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"bin counts must be >= 1, got nx={self.nx} ny={self.ny}")

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (self.lon_min, self.lat_min, self.lon_max, self.lat_max)

    @property
    def bin_width(self) -> float:
        return (self.lon_max - self.lon_min) / self.nx

    @property
    def bin_height(self) -> float:
        return (self.lat_max - self.lat_min) / self.ny

    @property
    def n_bins(self) -> int:
        return self.nx * self.ny

    def contains(self, lon: float, lat: float) -> bool:
        return (
            self.lon_min <= lon <= self.lon_max
            and self.lat_min <= lat <= self.lat_max
        )

    def bin_point(self, lon: float, lat: float) -> BinIndex:
        """Assign a point to the bin whose center is nearest.

        Equivalent to flooring the continuous bin coordinate: a point exactly
        on an interior bin edge goes to the higher-index bin, and points on
        the bbox max edges clamp into the last bin.

        Raises
        ------
        OutOfBoundsError
            If the point is outside the bounding box.
        """
        if not self.contains(lon, lat):
            raise OutOfBoundsError(
                f"point ({lon}, {lat}) outside bbox {self.bbox}"
            )
        i = int((lon - self.lon_min) / self.bin_width)
        j = int((lat - self.lat_min) / self.bin_height)
        return BinIndex(min(i, self.nx - 1), min(j, self.ny - 1))

    def bin_points(
        self, lon: np.ndarray, lat: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized :meth:`bin_point`.

        Returns ``(i, j, inside)`` where ``inside`` marks points within the
        bbox; indices of outside points are undefined and must be masked by
        the caller.
        """
        lon = np.asarray(lon, dtype=np.float64)
        lat = np.asarray(lat, dtype=np.float64)
        inside = (
            (lon >= self.lon_min)
            & (lon <= self.lon_max)
            & (lat >= self.lat_min)
            & (lat <= self.lat_max)
        )
        i = ((lon - self.lon_min) / self.bin_width).astype(np.int64)
        j = ((lat - self.lat_min) / self.bin_height).astype(np.int64)
        np.clip(i, 0, self.nx - 1, out=i)
        np.clip(j, 0, self.ny - 1, out=j)
        return i, j, inside

    def bin_center(self, bin: BinIndex | tuple[int, int]) -> tuple[float, float]:
        i, j = bin
        return (
            self.lon_min + (i + 0.5) * self.bin_width,
            self.lat_min + (j + 0.5) * self.bin_height,
        )

    def bin_bounds(
        self, bin: BinIndex | tuple[int, int]
    ) -> tuple[float, float, float, float]:
        """Rectangle (lon_min, lat_min, lon_max, lat_max) of one bin."""
        i, j = bin
        return (
            self.lon_min + i * self.bin_width,
            self.lat_min + j * self.bin_height,
            self.lon_min + (i + 1) * self.bin_width,
            self.lat_min + (j + 1) * self.bin_height,
        )

    def flat_index(self, i, j):
        """Row-major flat bin id ``j * nx + i`` (scalar or array)."""
        return j * self.nx + i

    def unflatten(self, flat):
        """Inverse of :meth:`flat_index`; returns ``(i, j)``."""
        return flat % self.nx, flat // self.nx


@dataclass(frozen=True)
class TimeAxis:
    """Consecutive calendar years ``year_start .. year_start+year_count-1``."""

    year_start: int
    year_count: int

    def __post_init__(self):
        if self.year_count < 1:
            raise ValueError(f"year_count must be >= 1, got {self.year_count}")

    @property
    def years(self) -> range:
        return range(self.year_start, self.year_start + self.year_count)

    def year_index(self, year: int) -> int:
        idx = year - self.year_start
        if not 0 <= idx < self.year_count:
            raise ValueError(f"year {year} outside axis {self.years}")
        return idx

    def year_indices(self, timestamps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map Unix-second timestamps to year indices using UTC calendar years.

        Returns ``(year_idx, in_range)``; indices of out-of-range timestamps
        are undefined and must be masked by the caller.
        """
        ts = np.asarray(timestamps, dtype=np.int64)
        years = ts.astype("datetime64[s]").astype("datetime64[Y]").astype(np.int64)
        idx = years + EPOCH_YEAR - self.year_start
        in_range = (idx >= 0) & (idx < self.year_count)
        return idx, in_range


class PointBatch(Sequence):
    """Columnar batch of :class:`LabeledPoint` records.

    Behaves as an immutable sequence of points but stores the four fields as
    NumPy arrays, which is what the binning pipeline consumes directly.
    """

    __slots__ = ("lon", "lat", "timestamp", "label")

    def __init__(self, lon, lat, timestamp, label):
        self.lon = np.ascontiguousarray(lon, dtype=np.float64)
        self.lat = np.ascontiguousarray(lat, dtype=np.float64)
        self.timestamp = np.ascontiguousarray(timestamp, dtype=np.int64)
        self.label = np.ascontiguousarray(label, dtype=np.int64)
        n = len(self.lon)
        if not (len(self.lat) == len(self.timestamp) == len(self.label) == n):
            raise ValueError("field arrays must have equal length")

    @classmethod
    def from_points(cls, points) -> "PointBatch":
        pts = list(points)
        return cls(
            [p.lon for p in pts],
            [p.lat for p in pts],
            [p.timestamp for p in pts],
            [p.label for p in pts],
        )

    @classmethod
    def empty(cls) -> "PointBatch":
        return cls([], [], [], [])

    def __len__(self) -> int:
        return len(self.lon)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return PointBatch(
                self.lon[idx], self.lat[idx], self.timestamp[idx], self.label[idx]
            )
        return LabeledPoint(
            float(self.lon[idx]),
            float(self.lat[idx]),
            int(self.timestamp[idx]),
            int(self.label[idx]),
        )

    def __iter__(self) -> Iterator[LabeledPoint]:
        for k in range(len(self)):
            yield self[k]


def as_batch(points) -> PointBatch:
    """Coerce an iterable of points (or a batch) to :class:`PointBatch`."""
    if isinstance(points, PointBatch):
        return points
    return PointBatch.from_points(points)
