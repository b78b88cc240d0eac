import numpy as np
import pytest

from sentispot import (
    GridSpec,
    PointBatch,
    RegionQuery,
    TimeAxis,
    build_cube,
    local_ratio_series,
    mann_kendall,
    Trend,
)

from .conftest import VOCAB6, random_batch

DISGUST = VOCAB6.index("disgust")


def ts(year):
    return int(np.datetime64(f"{year}-06-15", "s").astype(np.int64))


class TestLocalRatioSeries:
    def test_simple_ratio(self, grid10, years10):
        lon = [2.5] * 10
        lat = [2.5] * 10
        labels = [DISGUST] * 3 + [VOCAB6.index("joy")] * 7
        batch = PointBatch(lon, lat, [ts(2010)] * 10, labels)
        cube, _ = build_cube(batch, grid10, years10, VOCAB6)
        series = local_ratio_series(
            cube, RegionQuery(2.0, 2.0, 3.0, 3.0, label="disgust")
        )
        assert series.years == tuple(range(2006, 2016))
        assert series.ratios[2010 - 2006] == pytest.approx(0.3)
        assert series.denominators[2010 - 2006] == 10

    def test_empty_year_is_none_not_zero(self, grid10, years10):
        batch = PointBatch([2.5], [2.5], [ts(2010)], [DISGUST])
        cube, _ = build_cube(batch, grid10, years10, VOCAB6)
        series = local_ratio_series(
            cube, RegionQuery(2.0, 2.0, 3.0, 3.0, label="disgust")
        )
        assert series.ratios[0] is None
        assert series.denominators[0] == 0
        assert series.ratios[4] == 1.0

    def test_disjoint_bbox_rejected(self, grid10, years10):
        cube, _ = build_cube(PointBatch.empty(), grid10, years10, VOCAB6)
        with pytest.raises(ValueError):
            local_ratio_series(cube, RegionQuery(20.0, 20.0, 30.0, 30.0, label=0))

    def test_degenerate_bbox_rejected(self):
        with pytest.raises(ValueError):
            RegionQuery(5.0, 0.0, 5.0, 1.0, label=0)

    def test_whole_grid_matches_global_ratio_exactly(self, grid10, years10):
        rng = np.random.default_rng(12)
        batch = random_batch(rng, 3000, grid10, years10)
        cube, _ = build_cube(batch, grid10, years10, VOCAB6)
        series = local_ratio_series(
            cube, RegionQuery(*grid10.bbox, label="disgust")
        )
        years = batch.timestamp.astype("datetime64[s]").astype("datetime64[Y]")
        years = years.astype(int) + 1970
        for k, year in enumerate(series.years):
            in_year = years == year
            total = int(in_year.sum())
            count = int((in_year & (batch.label == DISGUST)).sum())
            if total == 0:
                assert series.ratios[k] is None
            else:
                assert series.denominators[k] == total
                assert series.ratios[k] == count / total  # identical division

    def test_monotone_denominator_growth(self, grid10, years10):
        rng = np.random.default_rng(13)
        batch = random_batch(rng, 2000, grid10, years10)
        cube, _ = build_cube(batch, grid10, years10, VOCAB6)
        boxes = [
            (4.0, 4.0, 6.0, 6.0),
            (3.0, 3.0, 7.0, 7.0),
            (1.0, 1.0, 9.0, 9.0),
            grid10.bbox,
        ]
        prev = None
        for box in boxes:
            series = local_ratio_series(cube, RegionQuery(*box, label=0))
            if prev is not None:
                assert all(
                    d >= p for d, p in zip(series.denominators, prev)
                )
            prev = series.denominators

    def test_bin_center_membership_vs_point_oracle(self, grid10, years10):
        # query aligned to bin edges: center membership == point membership
        # for every interior point, so counts agree exactly
        rng = np.random.default_rng(14)
        batch = random_batch(rng, 4000, grid10, years10)
        cube, _ = build_cube(batch, grid10, years10, VOCAB6)
        box = (2.0, 3.0, 6.0, 8.0)
        series = local_ratio_series(cube, RegionQuery(*box, label="disgust"))
        years = batch.timestamp.astype("datetime64[s]").astype("datetime64[Y]")
        years = years.astype(int) + 1970
        # oracle ignores the grid: strict point-in-box filter (right-open to
        # match the binning convention on the shared edges)
        inside = (
            (batch.lon >= box[0]) & (batch.lon < box[2])
            & (batch.lat >= box[1]) & (batch.lat < box[3])
        )
        for k, year in enumerate(series.years):
            sel = inside & (years == year)
            total = int(sel.sum())
            count = int((sel & (batch.label == DISGUST)).sum())
            assert series.denominators[k] == total
            if total:
                assert series.ratios[k] == pytest.approx(count / total, abs=1e-15)


class TestRampScenario:
    def test_ramp_recovery_and_trend(self, backend):
        from sentispot import ClusterSpec, ScenarioSpec, generate

        spec = ScenarioSpec(
            bbox=(0.0, 0.0, 10.0, 10.0),
            year_start=2006,
            year_count=10,
            vocab=VOCAB6,
            background_per_year=0,
            clusters=(
                ClusterSpec(
                    center=(2.5, 2.5),
                    radius=0.9,
                    label="disgust",
                    year_first=2006,
                    year_last=2015,
                    points_per_year=200,
                    ratio=(0.1, 0.9),
                ),
            ),
        )
        batch, manifest = generate(spec, seed=7)
        grid = GridSpec(0.0, 0.0, 10.0, 10.0, 20, 20)
        cube, skips = build_cube(batch, grid, TimeAxis(2006, 10), VOCAB6)
        assert skips.skipped == 0
        series = local_ratio_series(
            cube, RegionQuery(1.5, 1.5, 3.5, 3.5, label="disgust")
        )
        for k, year in enumerate(series.years):
            target = 0.1 + 0.8 * k / 9
            assert series.denominators[k] == 200
            assert abs(series.ratios[k] - target) <= 1.0 / 200.0
            truth = manifest["clusters"][0]["years"][str(year)]
            assert series.ratios[k] == pytest.approx(truth["exact_ratio"])
        mk = mann_kendall([r for r in series.ratios], alpha=0.05)
        assert mk.trend is Trend.INCREASING
