"""Sparse space-time count cube and per-label ratio fields.

The cube holds per-(bin, year, label) photo counts for the occupied part of
the grid only; bins without photos simply have no entry and never receive a
statistic downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .grid import BinIndex, GridSpec, PointBatch, TimeAxis, as_batch

__all__ = ["SkipReport", "SpaceTimeCube", "RatioField", "build_cube"]


@dataclass
class SkipReport:
    """Tally of records accepted and dropped by ingestion/binning."""

    accepted: int = 0
    out_of_bbox: int = 0
    out_of_time: int = 0
    malformed: int = 0

    @property
    def skipped(self) -> int:
        return self.out_of_bbox + self.out_of_time + self.malformed

    @property
    def total(self) -> int:
        return self.accepted + self.skipped


@dataclass(frozen=True)
class RatioField:
    """Per-bin label ratio over the occupied bins of one cube slice.

    ``bins`` are row-major flat bin ids sorted ascending, ``values`` the
    matching ratios in [0, 1]. The field is immutable; downstream statistics
    read it concurrently without locking.
    """

    grid: GridSpec
    bins: np.ndarray
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.bins)

    @property
    def support(self) -> frozenset[BinIndex]:
        i, j = self.grid.unflatten(self.bins)
        return frozenset(BinIndex(int(a), int(b)) for a, b in zip(i, j))

    def as_dict(self) -> dict[BinIndex, float]:
        i, j = self.grid.unflatten(self.bins)
        return {
            BinIndex(int(a), int(b)): float(v)
            for a, b, v in zip(i, j, self.values)
        }

    @classmethod
    def from_dict(cls, grid: GridSpec, values: dict) -> "RatioField":
        """Build a field from a {(i, j): value} mapping (mostly for tests)."""
        flat = np.array(
            [grid.flat_index(int(i), int(j)) for (i, j) in values], dtype=np.int64
        )
        vals = np.array([float(v) for v in values.values()], dtype=np.float64)
        order = np.argsort(flat, kind="stable")
        return cls(grid=grid, bins=flat[order], values=vals[order])


class SpaceTimeCube:
    """Sparse (bin, year, label) count cube plus derived totals.

    Internally a sorted COO layout: ``bin_flat`` / ``year_idx`` give the
    occupied (bin, year) pairs in lexicographic order and ``label_counts``
    holds one count row per pair. Immutable after construction.
    """

    def __init__(
        self,
        grid: GridSpec,
        time: TimeAxis,
        vocab: Sequence[str],
        bin_flat: np.ndarray,
        year_idx: np.ndarray,
        label_counts: np.ndarray,
    ):
        if len(vocab) == 0:
            raise ValueError("vocabulary must be non-empty")
        if len(set(vocab)) != len(vocab):
            raise ValueError("vocabulary has duplicate labels")
        self.grid = grid
        self.time = time
        self.vocab = tuple(vocab)
        self.bin_flat = np.ascontiguousarray(bin_flat, dtype=np.int64)
        self.year_idx = np.ascontiguousarray(year_idx, dtype=np.int64)
        self.label_counts = np.ascontiguousarray(label_counts, dtype=np.int64)
        self.totals = self.label_counts.sum(axis=1)
        self._occupied = None

    # -- basic facts ---------------------------------------------------

    @property
    def n_labels(self) -> int:
        return len(self.vocab)

    @property
    def n_points(self) -> int:
        return int(self.totals.sum())

    @property
    def n_rows(self) -> int:
        """Number of occupied (bin, year) pairs."""
        return len(self.bin_flat)

    def occupied_bins(self) -> np.ndarray:
        """Flat ids of bins occupied in any year, sorted ascending."""
        if self._occupied is None:
            self._occupied = np.unique(self.bin_flat)
        return self._occupied

    def label_id(self, label) -> int:
        """Resolve a label name or id to its id, validating range."""
        if isinstance(label, str):
            try:
                return self.vocab.index(label)
            except ValueError:
                raise ValueError(f"unknown label {label!r}; vocab={self.vocab}")
        lid = int(label)
        if not 0 <= lid < self.n_labels:
            raise ValueError(f"label id {lid} outside vocabulary of {self.n_labels}")
        return lid

    # -- point lookups (test/inspection; bulk paths use arrays) --------

    def count(self, bin: BinIndex | tuple, year_index: int, label) -> int:
        row = self._row(bin, year_index)
        return 0 if row is None else int(self.label_counts[row, self.label_id(label)])

    def total(self, bin: BinIndex | tuple, year_index: int) -> int:
        row = self._row(bin, year_index)
        return 0 if row is None else int(self.totals[row])

    def _row(self, bin, year_index) -> Optional[int]:
        i, j = bin
        key = self.grid.flat_index(int(i), int(j)) * self.time.year_count + year_index
        keys = self.bin_flat * self.time.year_count + self.year_idx
        pos = int(np.searchsorted(keys, key))
        if pos < len(keys) and keys[pos] == key:
            return pos
        return None

    # -- slicing -------------------------------------------------------

    def ratio_field(self, label, year: Optional[int] = None) -> RatioField:
        """Per-bin ratio of one label, per Eq.-style count/total division.

        With ``year`` (a year *index* into the time axis) the slice covers
        that year only; otherwise counts are aggregated over all years.
        Only bins with at least one photo in the slice appear.
        """
        lid = self.label_id(label)
        if year is None:
            bins = self.occupied_bins()
            # rows are sorted by (bin, year): reduce over runs of equal bin
            starts = np.searchsorted(self.bin_flat, bins)
            if len(bins):
                counts = np.add.reduceat(self.label_counts[:, lid], starts)
                totals = np.add.reduceat(self.totals, starts)
            else:
                counts = np.zeros(0, dtype=np.int64)
                totals = np.zeros(0, dtype=np.int64)
        else:
            if not 0 <= year < self.time.year_count:
                raise ValueError(
                    f"year index {year} outside axis of {self.time.year_count}"
                )
            mask = self.year_idx == year
            bins = self.bin_flat[mask]
            counts = self.label_counts[mask, lid]
            totals = self.totals[mask]
        values = counts.astype(np.float64) / totals.astype(np.float64)
        return RatioField(grid=self.grid, bins=bins, values=values)

    # -- equality (exact; used by determinism tests) --------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpaceTimeCube):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.time == other.time
            and self.vocab == other.vocab
            and np.array_equal(self.bin_flat, other.bin_flat)
            and np.array_equal(self.year_idx, other.year_idx)
            and np.array_equal(self.label_counts, other.label_counts)
        )


def build_cube(
    points,
    grid: GridSpec,
    time: TimeAxis,
    vocab: Sequence[str],
) -> tuple[SpaceTimeCube, SkipReport]:
    """Bin a point stream into a :class:`SpaceTimeCube`.

    Every point inside the bbox and time axis is counted exactly once;
    points outside either are dropped and tallied in the returned
    :class:`SkipReport`. Input order does not affect the result.
    """
    if len(vocab) == 0:
        raise ValueError("vocabulary must be non-empty")
    batch: PointBatch = as_batch(points)
    n_labels = len(vocab)
    if len(batch) and (batch.label.min() < 0 or batch.label.max() >= n_labels):
        raise ValueError("label id outside vocabulary")

    i, j, inside = grid.bin_points(batch.lon, batch.lat)
    y, in_time = time.year_indices(batch.timestamp)
    keep = inside & in_time
    skips = SkipReport(
        accepted=int(keep.sum()),
        out_of_bbox=int((~inside).sum()),
        out_of_time=int((inside & ~in_time).sum()),
    )

    flat = grid.flat_index(i[keep], j[keep])
    key = (flat * time.year_count + y[keep]) * n_labels + batch.label[keep]
    uniq, counts = np.unique(key, return_counts=True)

    label = uniq % n_labels
    bin_year = uniq // n_labels
    rows = np.unique(bin_year)
    label_counts = np.zeros((len(rows), n_labels), dtype=np.int64)
    row_of = np.searchsorted(rows, bin_year)
    label_counts[row_of, label] = counts

    cube = SpaceTimeCube(
        grid=grid,
        time=time,
        vocab=vocab,
        bin_flat=rows // time.year_count,
        year_idx=rows % time.year_count,
        label_counts=label_counts,
    )
    return cube, skips
