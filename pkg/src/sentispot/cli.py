"""Command-line surface.

Subcommands: ``bin`` (points -> cube file), ``spatial`` (cube -> Gi*
GeoJSON), ``emerging`` (cube -> 17-category GeoJSON), ``local`` (cube ->
yearly ratio CSV), ``synth`` (scenario -> point CSV + manifest).

Exit codes: 0 success, 1 fatal error, 2 usage error. Diagnostics go to
stderr; data goes to files or stdout only.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import RunConfig
from .cube import SkipReport, build_cube
from .emerging import emerging_analysis
from .gistar import fdr_correct, gi_star
from .grid import GridSpec, TimeAxis
from .io import (
    ParseError,
    export_emerging,
    export_spatial,
    load_cube,
    parse_points,
    save_cube,
    write_points_csv,
)
from .localstats import RegionQuery, local_ratio_series
from .synth import ScenarioSpec, generate
from .weights import WeightsSpec, parse_scheme

__all__ = ["main"]


def _bbox(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("bbox must be lon_min,lat_min,lon_max,lat_max")
    return tuple(parts)


def _add_weights_flags(p):
    p.add_argument("--scheme", type=parse_scheme, default=None,
                   help="weights scheme: fixed-distance-band | k-nearest | contiguity")
    p.add_argument("--radius", type=float, default=None,
                   help="band/contiguity radius in bin widths (default 5)")
    p.add_argument("--k", type=int, default=None,
                   help="neighborhood size for k-nearest (self included)")
    p.add_argument("--alpha", type=float, default=None,
                   help="two-tailed significance level (default 0.05)")
    p.add_argument("--fdr", action="store_true", default=None,
                   help="apply Benjamini-Hochberg correction")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sentispot",
        description="Spatial and spatio-temporal hotspot detection over "
                    "labeled geotagged points.",
    )
    ap.add_argument("--config", default=None, help="JSON run configuration file")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bin", help="bin a point file into a cube file")
    p.add_argument("points", help="input point file (CSV or GeoJSON)")
    p.add_argument("--format", choices=["csv", "geojson"], default="csv")
    p.add_argument("--out", required=True, help="output cube file")
    p.add_argument("--bbox", type=_bbox, default=None,
                   help="grid bbox lon_min,lat_min,lon_max,lat_max")
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--year-start", type=int, default=None)
    p.add_argument("--year-count", type=int, default=None)
    p.add_argument("--vocab", default=None, help="comma-separated label names")

    p = sub.add_parser("spatial", help="Gi* hot/cold spots for one label")
    p.add_argument("cube", help="cube file from `bin`")
    p.add_argument("--emotion", required=True, help="label to analyze")
    p.add_argument("--year", type=int, default=None,
                   help="calendar year (default: all years aggregated)")
    p.add_argument("--out", default=None, help="output GeoJSON (default stdout)")
    _add_weights_flags(p)

    p = sub.add_parser("emerging", help="17-category space-time patterns")
    p.add_argument("cube")
    p.add_argument("--emotion", required=True)
    p.add_argument("--out", default=None, help="output GeoJSON (default stdout)")
    p.add_argument("--min-years", type=int, default=None,
                   help="minimum data years for a verdict (default 4)")
    p.add_argument("--include-no-pattern", action="store_true",
                   help="also export bins with no detected pattern")
    _add_weights_flags(p)

    p = sub.add_parser("local", help="yearly label-ratio series for a region")
    p.add_argument("cube")
    p.add_argument("--emotion", required=True)
    p.add_argument("--bbox", type=_bbox, required=True,
                   help="query bbox lon_min,lat_min,lon_max,lat_max")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output point CSV")
    p.add_argument("--manifest", default=None,
                   help="ground-truth manifest path (default OUT.manifest.json)")

    return ap


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    weights = cfg.weights
    if getattr(args, "scheme", None) is not None or \
       getattr(args, "radius", None) is not None or \
       getattr(args, "k", None) is not None:
        weights = WeightsSpec(
            scheme=args.scheme if args.scheme is not None else weights.scheme,
            radius=args.radius if args.radius is not None else weights.radius,
            k=args.k if args.k is not None else weights.k,
        )
    return cfg.override(
        weights=weights if weights is not cfg.weights else None,
        alpha=getattr(args, "alpha", None),
        fdr=getattr(args, "fdr", None),
        min_years=getattr(args, "min_years", None),
    )


def _cmd_bin(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    grid = cfg.grid
    if args.bbox or args.nx or args.ny:
        base = grid or GridSpec(-180, -90, 180, 90, 1, 1)
        bbox = args.bbox or base.bbox
        grid = GridSpec(*bbox, args.nx or base.nx, args.ny or base.ny)
    time = cfg.time
    if args.year_start is not None or args.year_count is not None:
        base = time or TimeAxis(1970, 1)
        time = TimeAxis(
            args.year_start if args.year_start is not None else base.year_start,
            args.year_count if args.year_count is not None else base.year_count,
        )
    vocab = tuple(args.vocab.split(",")) if args.vocab else cfg.vocab
    if grid is None or time is None or vocab is None:
        print(
            "error: bin needs a grid, time axis and vocab "
            "(via --config or --bbox/--nx/--ny/--year-start/--year-count/--vocab)",
            file=sys.stderr,
        )
        return 2

    points, parse_skips = parse_points(args.points, args.format, vocab)
    cube, bin_skips = build_cube(points, grid, time, vocab)
    save_cube(cube, args.out)
    report = SkipReport(
        accepted=bin_skips.accepted,
        out_of_bbox=bin_skips.out_of_bbox,
        out_of_time=bin_skips.out_of_time,
        malformed=parse_skips.malformed,
    )
    print(
        f"accepted {report.accepted} of {report.total} records "
        f"(out_of_bbox={report.out_of_bbox} out_of_time={report.out_of_time} "
        f"malformed={report.malformed})",
        file=sys.stderr,
    )
    return 0


def _emit(path, writer) -> None:
    """Call writer with the output path, or with stdout when none given."""
    writer(sys.stdout if path is None else path)
    if path is None:
        sys.stdout.write("\n")


def _cmd_spatial(args) -> int:
    cfg = _load_config(args)
    cube = load_cube(args.cube)
    year = None
    if args.year is not None:
        year = cube.time.year_index(args.year)
    field = cube.ratio_field(args.emotion, year=year)
    if field.n < 2:
        print("error: fewer than 2 occupied bins in the slice", file=sys.stderr)
        return 1
    results = gi_star(field, cfg.weights, alpha=cfg.alpha)
    if cfg.fdr:
        results = fdr_correct(results, cfg.alpha)
    if results.degenerate:
        print("note: constant field; all bins not significant", file=sys.stderr)
    _emit(args.out, lambda dest: export_spatial(results, cube.grid, dest, args.emotion))
    return 0


def _cmd_emerging(args) -> int:
    cfg = _load_config(args)
    cube = load_cube(args.cube)
    analysis = emerging_analysis(cube, args.emotion, cfg.emerging_config())
    if analysis.degenerate_years:
        years = [cube.time.year_start + y for y in analysis.degenerate_years]
        print(f"note: constant field in year(s) {years}", file=sys.stderr)
    _emit(
        args.out,
        lambda dest: export_emerging(
            analysis, cube.grid, dest, args.emotion,
            include_no_pattern=args.include_no_pattern,
        ),
    )
    return 0


def _cmd_local(args) -> int:
    cube = load_cube(args.cube)
    query = RegionQuery(*args.bbox, label=args.emotion)
    series = local_ratio_series(cube, query)

    def write(dest):
        own = isinstance(dest, str)
        fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
        try:
            fh.write("year,ratio,photos\n")
            for y, r, d in zip(series.years, series.ratios, series.denominators):
                fh.write(f"{y},{'' if r is None else repr(r)},{d}\n")
        finally:
            if own:
                fh.close()

    if args.out is None:
        write(sys.stdout)
    else:
        write(args.out)
    return 0


def _cmd_synth(args) -> int:
    spec = ScenarioSpec.from_file(args.scenario)
    batch, manifest = generate(spec, args.seed)
    write_points_csv(batch, spec.vocab, args.out)
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {len(batch)} points to {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "bin": _cmd_bin,
    "spatial": _cmd_spatial,
    "emerging": _cmd_emerging,
    "local": _cmd_local,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
