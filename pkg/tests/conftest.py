import numpy as np
import pytest

from sentispot import GridSpec, PointBatch, TimeAxis, build_cube
from sentispot import kernels

VOCAB6 = ("anger", "disgust", "fear", "joy", "sadness", "surprise")


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run the test once per kernel backend."""
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


@pytest.fixture
def grid10():
    return GridSpec(0.0, 0.0, 10.0, 10.0, 10, 10)


@pytest.fixture
def years10():
    return TimeAxis(2006, 10)


def random_batch(rng, n, grid, time, n_labels=6):
    """Uniform random points inside a grid/time axis."""
    t0 = np.datetime64(f"{time.year_start}-01-01", "s").astype(np.int64)
    t1 = np.datetime64(f"{time.year_start + time.year_count}-01-01", "s").astype(
        np.int64
    )
    return PointBatch(
        rng.uniform(grid.lon_min, grid.lon_max, n),
        rng.uniform(grid.lat_min, grid.lat_max, n),
        rng.integers(int(t0), int(t1), n, dtype=np.int64),
        rng.integers(0, n_labels, n, dtype=np.int64),
    )


def random_cube(seed=0, n=2000, grid=None, time=None, vocab=VOCAB6):
    rng = np.random.default_rng(seed)
    grid = grid or GridSpec(0.0, 0.0, 10.0, 10.0, 10, 10)
    time = time or TimeAxis(2006, 10)
    batch = random_batch(rng, n, grid, time, n_labels=len(vocab))
    cube, _ = build_cube(batch, grid, time, vocab)
    return cube
