"""Point ingestion, cube serialization, and GeoJSON export.

File contracts (all byte-stable for identical inputs):

* Point CSV: header ``lon,lat,timestamp,label``; timestamp ISO-8601 UTC
  (``2011-07-04T12:00:00Z``) or integer Unix seconds; label a vocabulary
  name. Malformed rows are skipped and counted, a missing header is fatal.
* Point GeoJSON: FeatureCollection of Point features with properties
  ``timestamp`` and ``label``.
* Cube file: one JSON header line (format tag, version, grid, time axis,
  vocab, record count) followed by little-endian int64 records
  ``(i, j, year_index, label_id, count)`` sorted lexicographically.
* Result GeoJSON: one Polygon per occupied bin (the bin rectangle),
  features sorted by (j, i); floats serialized at full precision.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .cube import SkipReport, SpaceTimeCube
from .emerging import PATTERN_NAMES, EmergingAnalysis, EmergingPattern
from .gistar import GiField, SpotClass
from .grid import GridSpec, PointBatch, TimeAxis

__all__ = [
    "ParseError",
    "parse_points",
    "write_points_csv",
    "save_cube",
    "load_cube",
    "export_spatial",
    "export_emerging",
]

CUBE_FORMAT = "sentispot-cube"
CUBE_VERSION = 1
CSV_HEADER = ("lon", "lat", "timestamp", "label")

_CLASS_NAMES = {
    int(SpotClass.HOT): "hot",
    int(SpotClass.COLD): "cold",
    int(SpotClass.NOT_SIGNIFICANT): "not_significant",
}


class ParseError(ValueError):
    """Fatal input problem (unreadable stream, bad header, bad magic)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def parse_timestamp(text: str) -> int:
    """ISO-8601 (UTC assumed when unzoned) or integer Unix seconds."""
    t = text.strip()
    if not t:
        raise ValueError("empty timestamp")
    body = t[1:] if t[0] in "+-" else t
    if body.isdigit():
        return int(t)
    iso = t[:-1] + "+00:00" if t.endswith("Z") else t
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _iter_text_lines(source):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
        return
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def _parse_csv(source, vocab) -> tuple[PointBatch, SkipReport]:
    label_ids = {name: k for k, name in enumerate(vocab)}
    lines = _iter_text_lines(source)
    try:
        header = next(lines)
    except StopIteration:
        raise ParseError("empty input, missing CSV header", line=1)
    cols = tuple(c.strip() for c in header.rstrip("\r\n").split(","))
    if cols != CSV_HEADER:
        raise ParseError(
            f"expected header {','.join(CSV_HEADER)!r}, got {header.strip()!r}",
            line=1,
        )

    lon, lat, ts, lab = [], [], [], []
    malformed = 0
    for lineno, raw in enumerate(lines, start=2):
        row = raw.rstrip("\r\n")
        if not row:
            continue
        parts = row.split(",")
        try:
            if len(parts) != 4:
                raise ValueError("wrong field count")
            x = float(parts[0])
            y = float(parts[1])
            if not (-180.0 <= x <= 180.0 and -90.0 <= y <= 90.0):
                raise ValueError("coordinate out of WGS84 range")
            t = parse_timestamp(parts[2])
            e = label_ids[parts[3].strip()]
        except (ValueError, KeyError):
            malformed += 1
            continue
        lon.append(x)
        lat.append(y)
        ts.append(t)
        lab.append(e)

    batch = PointBatch(lon, lat, ts, lab)
    return batch, SkipReport(accepted=len(batch), malformed=malformed)


def _parse_geojson(source, vocab) -> tuple[PointBatch, SkipReport]:
    label_ids = {name: k for k, name in enumerate(vocab)}
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line=exc.lineno)
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ParseError("FeatureCollection without a features array")

    lon, lat, ts, lab = [], [], [], []
    malformed = 0
    for feat in features:
        try:
            geom = feat["geometry"]
            if geom["type"] != "Point":
                raise ValueError("not a Point")
            x, y = (float(v) for v in geom["coordinates"][:2])
            if not (-180.0 <= x <= 180.0 and -90.0 <= y <= 90.0):
                raise ValueError("coordinate out of WGS84 range")
            props = feat["properties"]
            t = parse_timestamp(str(props["timestamp"]))
            e = label_ids[props["label"]]
        except (KeyError, ValueError, TypeError, IndexError):
            malformed += 1
            continue
        lon.append(x)
        lat.append(y)
        ts.append(t)
        lab.append(e)

    batch = PointBatch(lon, lat, ts, lab)
    return batch, SkipReport(accepted=len(batch), malformed=malformed)


def parse_points(source, format: str, vocab) -> tuple[PointBatch, SkipReport]:
    """Read labeled points from CSV or GeoJSON.

    Malformed records are skipped and tallied; structural problems
    (missing header, invalid JSON) raise :class:`ParseError`.
    """
    fmt = format.lower()
    if fmt == "csv":
        return _parse_csv(source, vocab)
    if fmt == "geojson":
        return _parse_geojson(source, vocab)
    raise ValueError(f"unknown point format {format!r}")


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def write_points_csv(batch: PointBatch, vocab, dest) -> None:
    """Inverse of the CSV reader; floats at full round-trip precision."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        fh.write(",".join(CSV_HEADER) + "\n")
        for k in range(len(batch)):
            fh.write(
                f"{float(batch.lon[k])!r},{float(batch.lat[k])!r},"
                f"{_iso(batch.timestamp[k])},{vocab[int(batch.label[k])]}\n"
            )
    finally:
        if own:
            fh.close()


# -- cube file -------------------------------------------------------------


def save_cube(cube: SpaceTimeCube, path) -> None:
    g = cube.grid
    header = {
        "format": CUBE_FORMAT,
        "version": CUBE_VERSION,
        "grid": {"bbox": list(g.bbox), "nx": g.nx, "ny": g.ny},
        "time": {
            "year_start": cube.time.year_start,
            "year_count": cube.time.year_count,
        },
        "vocab": list(cube.vocab),
    }
    i = cube.bin_flat % g.nx
    j = cube.bin_flat // g.nx
    row, lab = np.nonzero(cube.label_counts > 0)
    rec = np.column_stack(
        [i[row], j[row], cube.year_idx[row], lab, cube.label_counts[row, lab]]
    ).astype(np.int64)
    order = np.lexsort((rec[:, 3], rec[:, 2], rec[:, 1], rec[:, 0]))
    rec = rec[order]
    header["records"] = int(len(rec))
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(rec, dtype="<i8").tobytes())


def load_cube(path) -> SpaceTimeCube:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ParseError("not a cube file (bad header line)", line=1)
    if header.get("format") != CUBE_FORMAT:
        raise ParseError(f"not a {CUBE_FORMAT} file", line=1)
    if header.get("version") != CUBE_VERSION:
        raise ParseError(f"unsupported cube version {header.get('version')}")

    grid = GridSpec(*header["grid"]["bbox"], header["grid"]["nx"], header["grid"]["ny"])
    time = TimeAxis(header["time"]["year_start"], header["time"]["year_count"])
    vocab = tuple(header["vocab"])
    n = int(header["records"])
    if len(blob) != n * 5 * 8:
        raise ParseError(
            f"cube payload is {len(blob)} bytes, expected {n * 5 * 8}"
        )
    rec = np.frombuffer(blob, dtype="<i8").reshape(n, 5).astype(np.int64)
    i, j, year, lab, count = rec.T
    if n and (
        i.min() < 0 or i.max() >= grid.nx
        or j.min() < 0 or j.max() >= grid.ny
        or year.min() < 0 or year.max() >= time.year_count
        or lab.min() < 0 or lab.max() >= len(vocab)
        or count.min() <= 0
    ):
        raise ParseError("cube record out of range")

    key = (j * grid.nx + i) * time.year_count + year
    rows = np.unique(key)
    label_counts = np.zeros((len(rows), len(vocab)), dtype=np.int64)
    pos = np.searchsorted(rows, key)
    label_counts[pos, lab] = count
    return SpaceTimeCube(
        grid=grid,
        time=time,
        vocab=vocab,
        bin_flat=rows // time.year_count,
        year_idx=rows % time.year_count,
        label_counts=label_counts,
    )


# -- GeoJSON export ---------------------------------------------------------


def _bin_polygon(grid: GridSpec, i: int, j: int) -> dict:
    x0, y0, x1, y1 = grid.bin_bounds((i, j))
    return {
        "type": "Polygon",
        "coordinates": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]],
    }


def _write_collection(dest, features: Iterable[str]) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write('{"type":"FeatureCollection","features":[')
        for k, feat in enumerate(features):
            if k:
                fh.write(",")
            fh.write(feat)
        fh.write("]}")
    finally:
        if own:
            fh.close()


def _feature(grid, i, j, properties: dict) -> str:
    return json.dumps(
        {
            "type": "Feature",
            "geometry": _bin_polygon(grid, i, j),
            "properties": properties,
        },
        separators=(",", ":"),
    )


def export_spatial(results, grid: GridSpec, path, emotion: str) -> None:
    """Write Gi* results as a bin-rectangle FeatureCollection.

    One feature per occupied bin with properties i, j, emotion, z, p and
    class (hot / cold / not_significant), ordered by (j, i).
    """
    if isinstance(results, GiField):
        bins, z, p, classes = results.bins, results.z, results.p, results.classes
    else:
        rows = sorted(results, key=lambda r: (r.bin.j, r.bin.i))
        bins = np.array([grid.flat_index(r.bin.i, r.bin.j) for r in rows], dtype=np.int64)
        z = np.array([r.z for r in rows])
        p = np.array([r.p for r in rows])
        classes = np.array([int(r.spot_class) for r in rows], dtype=np.int8)

    def gen():
        for k in range(len(bins)):
            i = int(bins[k]) % grid.nx
            j = int(bins[k]) // grid.nx
            yield _feature(
                grid,
                i,
                j,
                {
                    "i": i,
                    "j": j,
                    "emotion": emotion,
                    "z": float(z[k]),
                    "p": float(p[k]),
                    "class": _CLASS_NAMES[int(classes[k])],
                },
            )

    _write_collection(path, gen())


def export_emerging(
    results,
    grid: GridSpec,
    path,
    emotion: str,
    include_no_pattern: bool = False,
) -> None:
    """Write emerging-pattern categories as a bin-rectangle FeatureCollection.

    Properties: i, j, emotion, pattern (snake_case category name) and
    z_series (per-year Gi* z, null for no-data years). NO_PATTERN bins are
    omitted unless ``include_no_pattern`` is set.
    """
    if isinstance(results, EmergingAnalysis):
        bins = results.bins
        patterns = results.patterns
        zmat = results.zmat

        def rows():
            for k in range(len(bins)):
                code = int(patterns[k])
                if code == 0 and not include_no_pattern:
                    continue
                zs = [
                    None if np.isnan(v) else float(v) for v in zmat[k]
                ]
                yield int(bins[k]), code, zs

    else:
        items = sorted(results.items(), key=lambda kv: (kv[0][1], kv[0][0]))

        def rows():
            for (i, j), res in items:
                code = int(res.pattern)
                if code == 0 and not include_no_pattern:
                    continue
                yield grid.flat_index(i, j), code, list(res.history.z_series)

    def gen():
        for flat, code, zs in rows():
            i = int(flat) % grid.nx
            j = int(flat) // grid.nx
            yield _feature(
                grid,
                i,
                j,
                {
                    "i": i,
                    "j": j,
                    "emotion": emotion,
                    "pattern": PATTERN_NAMES[EmergingPattern(code)],
                    "z_series": zs,
                },
            )

    _write_collection(path, gen())
