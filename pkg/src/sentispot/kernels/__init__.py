"""Hot-kernel backend selection.

Two interchangeable backends implement the inner loops (neighbor sums for
the local spatial statistic, batched Mann-Kendall moments): a Cython
extension compiled at install time and a pure NumPy fallback. The compiled
backend is picked automatically when present; :func:`use_backend` switches
explicitly (tests and the benchmark use it to compare the two).

Both backends are deterministic and produce identical output for identical
input, including float accumulation order.
"""

from __future__ import annotations

import numpy as np

from . import pyfallback

_BACKENDS = {"python": pyfallback}

try:
    from . import _ckernels  # type: ignore[attr-defined]

    _BACKENDS["compiled"] = _ckernels
except ImportError:
    _ckernels = None

_active = "compiled" if "compiled" in _BACKENDS else "python"

__all__ = [
    "active_backend",
    "available_backends",
    "use_backend",
    "neighbor_sums",
    "mk_batch",
]


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def use_backend(name: str) -> str:
    """Select the kernel backend; returns the previously active name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(
            f"backend {name!r} not available; have {available_backends()}"
        )
    previous = _active
    _active = name
    return previous


def neighbor_sums(bin_flat, values, nx, ny, offsets):
    """Dispatch to the active backend; see :func:`pyfallback.neighbor_sums`."""
    bin_flat = np.ascontiguousarray(bin_flat, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if offsets.ndim != 2 or offsets.shape[1] != 2:
        raise ValueError("offsets must be an (m, 2) array of (dx, dy)")
    return _BACKENDS[_active].neighbor_sums(bin_flat, values, int(nx), int(ny), offsets)


def mk_batch(series, valid):
    """Dispatch to the active backend; see :func:`pyfallback.mk_batch`."""
    series = np.ascontiguousarray(series, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=bool)
    if series.shape != valid.shape or series.ndim != 2:
        raise ValueError("series and valid must be equal-shape 2-D arrays")
    backend = _BACKENDS[_active]
    if backend is pyfallback:
        return backend.mk_batch(series, valid)
    return backend.mk_batch(series, valid.view(np.uint8))
