"""sentispot: spatial and spatio-temporal hotspot detection for labeled
geotagged point data.

Pipeline: bin points into a grid/year cube, derive per-label ratio fields,
score them with the Getis-Ord Gi* local statistic, test per-bin yearly
z-series with Mann-Kendall, and classify each location into one of 17
emerging-pattern categories.
"""

from .config import DEFAULT_VOCAB, RunConfig
from .cube import RatioField, SkipReport, SpaceTimeCube, build_cube
from .emerging import (
    BinHistory,
    EmergingAnalysis,
    EmergingConfig,
    EmergingPattern,
    EmergingResult,
    PATTERN_NAMES,
    classify_emerging,
    emerging_analysis,
    yearly_slices,
)
from .gistar import (
    GiField,
    GiResult,
    SpotClass,
    classify_spot,
    critical_z,
    fdr_correct,
    gi_star,
)
from .grid import (
    BinIndex,
    GridSpec,
    LabeledPoint,
    OutOfBoundsError,
    PointBatch,
    TimeAxis,
)
from .io import (
    ParseError,
    export_emerging,
    export_spatial,
    load_cube,
    parse_points,
    save_cube,
    write_points_csv,
)
from .localstats import RegionQuery, YearlyRatioSeries, local_ratio_series
from .mannkendall import MKResult, Trend, mann_kendall
from .synth import ClusterSpec, ScenarioSpec, generate
from .weights import WeightScheme, WeightsSpec, neighbors

__version__ = "0.1.0"

__all__ = [
    "BinHistory",
    "BinIndex",
    "ClusterSpec",
    "DEFAULT_VOCAB",
    "EmergingAnalysis",
    "EmergingConfig",
    "EmergingPattern",
    "EmergingResult",
    "GiField",
    "GiResult",
    "GridSpec",
    "LabeledPoint",
    "MKResult",
    "OutOfBoundsError",
    "ParseError",
    "PATTERN_NAMES",
    "PointBatch",
    "RatioField",
    "RegionQuery",
    "RunConfig",
    "ScenarioSpec",
    "SkipReport",
    "SpaceTimeCube",
    "SpotClass",
    "TimeAxis",
    "Trend",
    "WeightScheme",
    "WeightsSpec",
    "YearlyRatioSeries",
    "build_cube",
    "classify_emerging",
    "classify_spot",
    "critical_z",
    "emerging_analysis",
    "export_emerging",
    "export_spatial",
    "fdr_correct",
    "generate",
    "gi_star",
    "load_cube",
    "local_ratio_series",
    "mann_kendall",
    "neighbors",
    "parse_points",
    "save_cube",
    "write_points_csv",
    "yearly_slices",
]
