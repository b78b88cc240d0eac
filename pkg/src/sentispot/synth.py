"""Reproducible synthetic point scenarios for pipeline validation.

A scenario is uniform background noise plus optional space-time clusters
(disc, year range, one boosted label). Label mixtures are hit *exactly*
via largest-remainder quantization, so generated ratios differ from their
targets only by the 1/n rounding floor; the exact per-year ground truth is
emitted in a manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .grid import PointBatch

__all__ = ["ClusterSpec", "ScenarioSpec", "generate"]


def _year_seconds(year: int) -> tuple[int, int]:
    start = np.datetime64(f"{year}-01-01", "s").astype(np.int64)
    end = np.datetime64(f"{year + 1}-01-01", "s").astype(np.int64)
    return int(start), int(end)


def quantized_counts(weights: np.ndarray, n: int) -> np.ndarray:
    """Split n items into groups matching ``weights`` as exactly as possible.

    Floors the ideal counts and hands the leftovers to the largest
    fractional remainders (ties toward the lower index). The result always
    sums to n.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("mixture weights must be non-negative and sum > 0")
    ideal = weights / weights.sum() * n
    base = np.floor(ideal).astype(np.int64)
    frac = ideal - base
    extra = n - int(base.sum())
    order = np.argsort(-frac, kind="stable")
    base[order[:extra]] += 1
    return base


@dataclass(frozen=True)
class ClusterSpec:
    """One injected space-time cluster.

    ``ratio`` is the target share of ``label`` among the cluster's own
    points; a (start, end) pair ramps it linearly across the active years.
    The remaining share is spread evenly over the other labels.
    """

    center: tuple[float, float]
    radius: float
    label: str
    year_first: int
    year_last: int
    points_per_year: int
    ratio: Union[float, tuple[float, float]]

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("cluster radius must be > 0")
        if self.year_last < self.year_first:
            raise ValueError("cluster year range is empty")
        if self.points_per_year < 0:
            raise ValueError("points_per_year must be >= 0")
        for r in self._ratio_pair():
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"cluster ratio {r} outside [0, 1]")

    def _ratio_pair(self) -> tuple[float, float]:
        if isinstance(self.ratio, (tuple, list)):
            a, b = self.ratio
            return float(a), float(b)
        return float(self.ratio), float(self.ratio)

    def ratio_for(self, year: int) -> float:
        lo, hi = self._ratio_pair()
        if self.year_last == self.year_first:
            return lo
        t = (year - self.year_first) / (self.year_last - self.year_first)
        return lo + (hi - lo) * t

    def active(self, year: int) -> bool:
        return self.year_first <= year <= self.year_last


@dataclass(frozen=True)
class ScenarioSpec:
    bbox: tuple[float, float, float, float]
    year_start: int
    year_count: int
    vocab: tuple[str, ...]
    background_per_year: int = 0
    background_mixture: Optional[tuple[float, ...]] = None
    clusters: tuple[ClusterSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.vocab) == 0:
            raise ValueError("vocabulary must be non-empty")
        lon_min, lat_min, lon_max, lat_max = self.bbox
        if not (lon_min < lon_max and lat_min < lat_max):
            raise ValueError(f"degenerate scenario bbox {self.bbox}")
        if self.background_mixture is not None and len(
            self.background_mixture
        ) != len(self.vocab):
            raise ValueError("background_mixture length must match vocab")
        for c in self.clusters:
            if c.label not in self.vocab:
                raise ValueError(f"cluster label {c.label!r} not in vocab")

    @property
    def years(self) -> range:
        return range(self.year_start, self.year_start + self.year_count)

    def to_dict(self) -> dict:
        return {
            "bbox": list(self.bbox),
            "year_start": self.year_start,
            "year_count": self.year_count,
            "vocab": list(self.vocab),
            "background_per_year": self.background_per_year,
            "background_mixture": (
                None
                if self.background_mixture is None
                else list(self.background_mixture)
            ),
            "clusters": [
                {
                    "center": list(c.center),
                    "radius": c.radius,
                    "label": c.label,
                    "year_first": c.year_first,
                    "year_last": c.year_last,
                    "points_per_year": c.points_per_year,
                    "ratio": (
                        list(c.ratio)
                        if isinstance(c.ratio, (tuple, list))
                        else c.ratio
                    ),
                }
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        clusters = tuple(
            ClusterSpec(
                center=tuple(c["center"]),
                radius=float(c["radius"]),
                label=c["label"],
                year_first=int(c["year_first"]),
                year_last=int(c["year_last"]),
                points_per_year=int(c["points_per_year"]),
                ratio=(
                    tuple(c["ratio"])
                    if isinstance(c["ratio"], (tuple, list))
                    else float(c["ratio"])
                ),
            )
            for c in d.get("clusters", [])
        )
        mixture = d.get("background_mixture")
        return cls(
            bbox=tuple(d["bbox"]),
            year_start=int(d["year_start"]),
            year_count=int(d["year_count"]),
            vocab=tuple(d["vocab"]),
            background_per_year=int(d.get("background_per_year", 0)),
            background_mixture=None if mixture is None else tuple(mixture),
            clusters=clusters,
        )

    @classmethod
    def from_file(cls, path) -> "ScenarioSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _mixture_labels(rng, weights, n) -> np.ndarray:
    counts = quantized_counts(weights, n)
    labels = np.repeat(np.arange(len(weights), dtype=np.int64), counts)
    rng.shuffle(labels)
    return labels


def _cluster_mixture(spec: ScenarioSpec, cluster: ClusterSpec, year: int):
    ratio = cluster.ratio_for(year)
    n_labels = len(spec.vocab)
    lid = spec.vocab.index(cluster.label)
    if n_labels == 1:
        return np.array([1.0]), ratio
    weights = np.full(n_labels, (1.0 - ratio) / (n_labels - 1))
    weights[lid] = ratio
    return weights, ratio


def generate(spec: ScenarioSpec, seed: int) -> tuple[PointBatch, dict]:
    """Generate the scenario's points plus the ground-truth manifest.

    Deterministic for a fixed (spec, seed): a single PCG64 stream drawn in
    year order, background first, then clusters in declaration order.
    """
    rng = np.random.default_rng(seed)
    lon_min, lat_min, lon_max, lat_max = spec.bbox
    n_labels = len(spec.vocab)
    bg_weights = (
        np.full(n_labels, 1.0 / n_labels)
        if spec.background_mixture is None
        else np.asarray(spec.background_mixture, dtype=np.float64)
    )

    lots_lon, lots_lat, lots_ts, lots_label = [], [], [], []
    cluster_truth = [dict() for _ in spec.clusters]

    for year in spec.years:
        t0, t1 = _year_seconds(year)
        n_bg = spec.background_per_year
        if n_bg:
            lots_lon.append(rng.uniform(lon_min, lon_max, n_bg))
            lots_lat.append(rng.uniform(lat_min, lat_max, n_bg))
            lots_ts.append(rng.integers(t0, t1, n_bg, dtype=np.int64))
            lots_label.append(_mixture_labels(rng, bg_weights, n_bg))
        for ci, cluster in enumerate(spec.clusters):
            if not cluster.active(year) or cluster.points_per_year == 0:
                continue
            n = cluster.points_per_year
            r = cluster.radius * np.sqrt(rng.uniform(0.0, 1.0, n))
            theta = rng.uniform(0.0, 2.0 * np.pi, n)
            lots_lon.append(cluster.center[0] + r * np.cos(theta))
            lots_lat.append(cluster.center[1] + r * np.sin(theta))
            lots_ts.append(rng.integers(t0, t1, n, dtype=np.int64))
            weights, ratio = _cluster_mixture(spec, cluster, year)
            labels = _mixture_labels(rng, weights, n)
            lots_label.append(labels)
            lid = spec.vocab.index(cluster.label)
            label_points = int((labels == lid).sum())
            cluster_truth[ci][str(year)] = {
                "points": n,
                "label_points": label_points,
                "target_ratio": ratio,
                "exact_ratio": label_points / n,
            }

    if lots_lon:
        batch = PointBatch(
            np.concatenate(lots_lon),
            np.concatenate(lots_lat),
            np.concatenate(lots_ts),
            np.concatenate(lots_label),
        )
    else:
        batch = PointBatch.empty()

    manifest = {
        "format": "sentispot-synth-manifest",
        "version": 1,
        "seed": seed,
        "scenario": spec.to_dict(),
        "total_points": len(batch),
        "clusters": [
            {
                "center": list(c.center),
                "radius": c.radius,
                "label": c.label,
                "years": cluster_truth[ci],
            }
            for ci, c in enumerate(spec.clusters)
        ],
    }
    return batch, manifest
