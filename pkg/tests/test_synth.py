import io
import json

import numpy as np
import pytest

from sentispot import ClusterSpec, ScenarioSpec, generate, write_points_csv
from sentispot.synth import quantized_counts

from .conftest import VOCAB6


def base_spec(**kw):
    defaults = dict(
        bbox=(0.0, 0.0, 10.0, 10.0),
        year_start=2006,
        year_count=10,
        vocab=VOCAB6,
        background_per_year=600,
    )
    defaults.update(kw)
    return ScenarioSpec(**defaults)


class TestQuantizedCounts:
    def test_sums_and_rounding(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            m = int(rng.integers(1, 9))
            w = rng.uniform(0.01, 1.0, m)
            n = int(rng.integers(0, 500))
            counts = quantized_counts(w, n)
            assert counts.sum() == n
            ideal = w / w.sum() * n
            assert np.all(np.abs(counts - ideal) < 1.0)

    def test_bad_weights_rejected(self):
        with pytest.raises(ValueError):
            quantized_counts(np.array([0.0, 0.0]), 10)
        with pytest.raises(ValueError):
            quantized_counts(np.array([-0.5, 1.0]), 10)


class TestGenerate:
    def test_uniform_background_ratios(self):
        spec = base_spec()
        batch, manifest = generate(spec, seed=3)
        assert len(batch) == 6000
        assert manifest["total_points"] == 6000
        # exact largest-remainder assignment keeps per-label shares within
        # rounding of 1/6, far inside the 3-sigma binomial bound
        n = len(batch)
        sigma = np.sqrt((1 / 6) * (5 / 6) / n)
        for lab in range(6):
            share = float((batch.label == lab).sum()) / n
            assert abs(share - 1 / 6) <= 3 * sigma

    def test_deterministic_repeat(self, tmp_path):
        spec = base_spec(clusters=(
            ClusterSpec(center=(5.0, 5.0), radius=0.5, label="joy",
                        year_first=2013, year_last=2015,
                        points_per_year=100, ratio=0.8),
        ))
        out_a = io.StringIO()
        out_b = io.StringIO()
        batch_a, man_a = generate(spec, seed=11)
        batch_b, man_b = generate(spec, seed=11)
        write_points_csv(batch_a, spec.vocab, out_a)
        write_points_csv(batch_b, spec.vocab, out_b)
        assert out_a.getvalue() == out_b.getvalue()
        assert json.dumps(man_a, sort_keys=True) == json.dumps(man_b, sort_keys=True)
        # a different seed must actually change the stream
        batch_c, _ = generate(spec, seed=12)
        out_c = io.StringIO()
        write_points_csv(batch_c, spec.vocab, out_c)
        assert out_c.getvalue() != out_a.getvalue()

    def test_cluster_geometry_and_truth(self):
        cluster = ClusterSpec(
            center=(5.0, 5.0), radius=0.5, label="joy",
            year_first=2013, year_last=2015, points_per_year=200, ratio=0.8,
        )
        spec = base_spec(background_per_year=0, clusters=(cluster,))
        batch, manifest = generate(spec, seed=5)
        assert len(batch) == 600
        d = np.hypot(batch.lon - 5.0, batch.lat - 5.0)
        assert d.max() <= 0.5
        years = batch.timestamp.astype("datetime64[s]").astype("datetime64[Y]")
        years = years.astype(int) + 1970
        assert set(years.tolist()) == {2013, 2014, 2015}
        joy = VOCAB6.index("joy")
        for year in (2013, 2014, 2015):
            truth = manifest["clusters"][0]["years"][str(year)]
            got = int(((years == year) & (batch.label == joy)).sum())
            assert got == truth["label_points"] == round(0.8 * 200)
            assert truth["points"] == 200

    def test_ramp_schedule(self):
        cluster = ClusterSpec(
            center=(5.0, 5.0), radius=0.5, label="disgust",
            year_first=2006, year_last=2015, points_per_year=100,
            ratio=(0.1, 0.9),
        )
        spec = base_spec(background_per_year=0, clusters=(cluster,))
        _, manifest = generate(spec, seed=9)
        for k, year in enumerate(range(2006, 2016)):
            truth = manifest["clusters"][0]["years"][str(year)]
            target = 0.1 + 0.8 * k / 9
            assert truth["target_ratio"] == pytest.approx(target)
            # largest-remainder keeps every count within 1 of ideal
            assert abs(truth["exact_ratio"] - target) < 1.0 / 100

    def test_spec_json_roundtrip(self, tmp_path):
        spec = base_spec(clusters=(
            ClusterSpec(center=(1.0, 2.0), radius=0.25, label="fear",
                        year_first=2010, year_last=2012,
                        points_per_year=50, ratio=(0.2, 0.6)),
        ))
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
        again = ScenarioSpec.from_file(path)
        assert again == spec

    def test_validation(self):
        with pytest.raises(ValueError):
            base_spec(vocab=())
        with pytest.raises(ValueError):
            base_spec(clusters=(
                ClusterSpec(center=(0, 0), radius=1.0, label="nope",
                            year_first=2006, year_last=2006,
                            points_per_year=1, ratio=0.5),
            ))
        with pytest.raises(ValueError):
            ClusterSpec(center=(0, 0), radius=0.0, label="joy",
                        year_first=2006, year_last=2006,
                        points_per_year=1, ratio=0.5)
        with pytest.raises(ValueError):
            ClusterSpec(center=(0, 0), radius=1.0, label="joy",
                        year_first=2006, year_last=2006,
                        points_per_year=1, ratio=1.5)
