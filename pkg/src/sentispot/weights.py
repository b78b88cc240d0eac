"""Binary spatial neighborhood schemes over occupied grid bins.

Distances are measured between bin centers in index space (grid-cell
units), so a band radius of 1 reaches the four orthogonal neighbors but
not the diagonals at distance sqrt(2). Weights are binary and the bin
itself is always part of its own neighborhood (the "star" convention of
the local statistic this library computes).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .grid import BinIndex, GridSpec

__all__ = ["WeightScheme", "WeightsSpec", "neighbors", "stencil_offsets"]


class WeightScheme(str, Enum):
    FIXED_DISTANCE_BAND = "fixed-distance-band"
    K_NEAREST = "k-nearest"
    CONTIGUITY = "contiguity"


_ALIASES = {
    "band": WeightScheme.FIXED_DISTANCE_BAND,
    "fixed-distance-band": WeightScheme.FIXED_DISTANCE_BAND,
    "knn": WeightScheme.K_NEAREST,
    "k-nearest": WeightScheme.K_NEAREST,
    "contiguity": WeightScheme.CONTIGUITY,
}


@dataclass(frozen=True)
class WeightsSpec:
    """Neighborhood configuration for the local spatial statistic.

    ``radius`` (in bin widths) applies to the band and contiguity schemes;
    ``k`` (total neighborhood size, self included) to k-nearest.
    ``include_self`` is fixed True.
    """

    scheme: WeightScheme = WeightScheme.FIXED_DISTANCE_BAND
    radius: float = 5.0
    k: int = 8
    include_self: bool = True

    def __post_init__(self):
        if not isinstance(self.scheme, WeightScheme):
            object.__setattr__(self, "scheme", parse_scheme(self.scheme))
        if not self.include_self:
            raise ValueError("include_self must be True (star statistic)")
        if self.scheme is not WeightScheme.K_NEAREST and self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.scheme is WeightScheme.K_NEAREST and self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def parse_scheme(name) -> WeightScheme:
    if isinstance(name, WeightScheme):
        return name
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise ValueError(
            f"unknown weights scheme {name!r}; expected one of "
            f"{sorted(set(_ALIASES))}"
        )


def stencil_offsets(spec: WeightsSpec) -> np.ndarray:
    """Integer (dx, dy) stencil for the band/contiguity schemes.

    Band: Euclidean index-space distance <= radius (boundary inclusive);
    contiguity: Chebyshev distance <= radius. Sorted by (dy, dx) so both
    kernel backends accumulate in the same order.
    """
    if spec.scheme is WeightScheme.K_NEAREST:
        raise ValueError("k-nearest has no fixed stencil")
    reach = int(np.floor(spec.radius))
    out = []
    r2 = spec.radius * spec.radius
    for dy in range(-reach, reach + 1):
        for dx in range(-reach, reach + 1):
            if spec.scheme is WeightScheme.CONTIGUITY:
                out.append((dx, dy))
            elif dx * dx + dy * dy <= r2:
                out.append((dx, dy))
    return np.array(out, dtype=np.int64)


def _index_coords(grid: GridSpec, support: Iterable) -> dict[BinIndex, None]:
    seen = {}
    for b in support:
        i, j = b
        if not (0 <= i < grid.nx and 0 <= j < grid.ny):
            raise ValueError(f"support bin {b} outside grid")
        seen[BinIndex(int(i), int(j))] = None
    return seen


def neighbors(
    spec: WeightsSpec, grid: GridSpec, bin: BinIndex | tuple, support
) -> set[BinIndex]:
    """Occupied bins within reach of ``bin``, itself always included.

    ``support`` is the set of occupied bins. For the k-nearest scheme the
    neighborhood is the ``k`` closest occupied bins (self counts, at
    distance 0), with exact distance ties broken toward the lower row-major
    flat id. Band/contiguity neighborhoods are symmetric.
    """
    occupied = _index_coords(grid, support)
    bin = BinIndex(int(bin[0]), int(bin[1]))
    if bin not in occupied:
        raise ValueError(f"bin {bin} not in support")

    if spec.scheme is WeightScheme.K_NEAREST:
        ranked = sorted(
            occupied,
            key=lambda b: (
                (b.i - bin.i) ** 2 + (b.j - bin.j) ** 2,
                grid.flat_index(b.i, b.j),
            ),
        )
        return set(ranked[: min(spec.k, len(ranked))])

    out = set()
    for dx, dy in stencil_offsets(spec):
        cand = BinIndex(bin.i + int(dx), bin.j + int(dy))
        if cand in occupied:
            out.add(cand)
    return out
