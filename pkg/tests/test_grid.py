import numpy as np
import pytest

from sentispot import BinIndex, GridSpec, OutOfBoundsError, PointBatch, TimeAxis

from .oracles import nearest_center_bin


class TestBinPoint:
    def test_center_of_first_bin(self, grid10):
        assert grid10.bin_point(0.5, 0.5) == BinIndex(0, 0)

    def test_max_corner_clamps_to_last_bin(self, grid10):
        assert grid10.bin_point(10.0, 10.0) == BinIndex(9, 9)

    def test_interior_edge_goes_to_higher_index(self, grid10):
        # (3.0, 7.0) sits exactly between columns 2|3 and rows 6|7
        assert grid10.bin_point(3.0, 7.0) == BinIndex(3, 7)
        assert nearest_center_bin(grid10, 3.0, 7.0) == (3, 7)

    def test_outside_bbox_rejected(self, grid10):
        for lon, lat in [(-0.1, 5.0), (10.1, 5.0), (5.0, -0.1), (5.0, 10.1)]:
            with pytest.raises(OutOfBoundsError):
                grid10.bin_point(lon, lat)

    def test_matches_nearest_center_oracle(self):
        # dyadic grid and dyadic points keep the comparison exact
        grid = GridSpec(0.0, 0.0, 8.0, 8.0, 8, 8)
        rng = np.random.default_rng(42)
        pts = rng.integers(0, 8 * 64 + 1, size=(300, 2)) / 64.0
        for lon, lat in pts:
            got = grid.bin_point(float(lon), float(lat))
            assert tuple(got) == nearest_center_bin(grid, float(lon), float(lat))

    def test_vectorized_agrees_with_scalar(self, grid10):
        rng = np.random.default_rng(7)
        lon = rng.uniform(-1.0, 11.0, 500)
        lat = rng.uniform(-1.0, 11.0, 500)
        i, j, inside = grid10.bin_points(lon, lat)
        for k in range(500):
            if inside[k]:
                assert grid10.bin_point(lon[k], lat[k]) == (i[k], j[k])
            else:
                assert not grid10.contains(lon[k], lat[k])


class TestGridSpec:
    def test_rejects_degenerate_bbox(self):
        with pytest.raises(ValueError):
            GridSpec(0, 0, 0, 10, 10, 10)
        with pytest.raises(ValueError):
            GridSpec(0, 5, 10, 5, 10, 10)

    def test_rejects_zero_bins(self):
        with pytest.raises(ValueError):
            GridSpec(0, 0, 10, 10, 0, 10)

    def test_bin_geometry(self, grid10):
        assert grid10.bin_width == 1.0
        assert grid10.bin_height == 1.0
        assert grid10.bin_center((0, 0)) == (0.5, 0.5)
        assert grid10.bin_bounds((9, 9)) == (9.0, 9.0, 10.0, 10.0)

    def test_flat_roundtrip(self, grid10):
        flat = grid10.flat_index(3, 7)
        assert grid10.unflatten(flat) == (3, 7)


class TestTimeAxis:
    def test_rejects_empty_axis(self):
        with pytest.raises(ValueError):
            TimeAxis(2006, 0)

    def test_year_index(self, years10):
        assert years10.year_index(2006) == 0
        assert years10.year_index(2015) == 9
        with pytest.raises(ValueError):
            years10.year_index(2016)

    def test_utc_year_boundaries(self, years10):
        last_2010 = np.datetime64("2010-12-31T23:59:59", "s").astype(np.int64)
        first_2011 = np.datetime64("2011-01-01T00:00:00", "s").astype(np.int64)
        idx, ok = years10.year_indices(np.array([last_2010, first_2011]))
        assert ok.all()
        assert list(idx) == [4, 5]

    def test_out_of_range_flagged(self, years10):
        before = np.datetime64("2005-12-31T23:59:59", "s").astype(np.int64)
        after = np.datetime64("2016-01-01T00:00:00", "s").astype(np.int64)
        _, ok = years10.year_indices(np.array([before, after]))
        assert not ok.any()


class TestPointBatch:
    def test_sequence_protocol(self):
        batch = PointBatch([1.0, 2.0], [3.0, 4.0], [100, 200], [0, 1])
        assert len(batch) == 2
        assert batch[1].lon == 2.0 and batch[1].label == 1
        assert [p.timestamp for p in batch] == [100, 200]

    def test_from_points_roundtrip(self):
        from sentispot import LabeledPoint

        pts = [LabeledPoint(1.0, 2.0, 42, 3), LabeledPoint(-1.0, -2.0, 7, 0)]
        batch = PointBatch.from_points(pts)
        assert list(batch) == pts

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            PointBatch([1.0], [2.0, 3.0], [1], [0])
