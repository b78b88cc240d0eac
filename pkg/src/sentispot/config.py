"""Run configuration: JSON file plus command-line overrides (flags win)."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from .emerging import EmergingConfig
from .grid import GridSpec, TimeAxis
from .weights import WeightsSpec, parse_scheme

__all__ = ["RunConfig"]

DEFAULT_VOCAB = ("anger", "disgust", "fear", "joy", "sadness", "surprise")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs.

    ``grid``/``time``/``vocab`` drive ingestion; analysis subcommands read
    them from the cube file instead, so they may stay None there.
    """

    grid: Optional[GridSpec] = None
    time: Optional[TimeAxis] = None
    vocab: Optional[tuple[str, ...]] = None
    weights: WeightsSpec = WeightsSpec()
    alpha: float = 0.05
    fdr: bool = False
    min_years: int = 4

    def __post_init__(self):
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"alpha must be in (0, 0.5], got {self.alpha}")
        if self.min_years < 1:
            raise ValueError(f"min_years must be >= 1, got {self.min_years}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        grid = None
        if "grid" in d:
            g = d["grid"]
            grid = GridSpec(*g["bbox"], int(g["nx"]), int(g["ny"]))
        time = None
        if "time" in d:
            t = d["time"]
            time = TimeAxis(int(t["year_start"]), int(t["year_count"]))
        weights = WeightsSpec()
        if "weights" in d:
            w = d["weights"]
            weights = WeightsSpec(
                scheme=parse_scheme(w.get("scheme", "fixed-distance-band")),
                radius=float(w.get("radius", 5.0)),
                k=int(w.get("k", 8)),
            )
        vocab = tuple(d["vocab"]) if "vocab" in d else None
        return cls(
            grid=grid,
            time=time,
            vocab=vocab,
            weights=weights,
            alpha=float(d.get("alpha", 0.05)),
            fdr=bool(d.get("fdr", False)),
            min_years=int(d.get("min_years", 4)),
        )

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def emerging_config(self) -> EmergingConfig:
        return EmergingConfig(
            weights=self.weights,
            alpha=self.alpha,
            min_years=self.min_years,
            fdr=self.fdr,
        )

    def override(self, **kwargs) -> "RunConfig":
        """Apply non-None keyword overrides (CLI flags beat the file)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self
