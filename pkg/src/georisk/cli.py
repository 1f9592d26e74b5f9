"""Command-line entry point: ``georisk <subcommand> ...``.

Exit codes: 0 success, 1 user or data error, 2 internal error.  Results go
to stdout, diagnostics to stderr.  Set ``GEORISK_LOG`` to ``off``, ``info``
or ``debug`` to control logging (warnings are shown by default).
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from georisk import ingest, optimize, render, scoring
from georisk.errors import GeoRiskError

log = logging.getLogger("georisk")

TARGETS = ("positive", "death", "both")


def _configure_logging():
    level = os.environ.get("GEORISK_LOG", "").lower()
    levels = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _write_json(path, doc):
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def _load_scored(path):
    dataset = ingest.load_dataset(path)
    table = scoring.score_dataset(dataset)
    for w in table.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return dataset, table


def cmd_synth(args):
    ds = ingest.generate_synthetic(args.n_regions, tuple(args.weights), args.noise_sd, args.seed)
    ingest.write_dataset(ds, args.output)
    print(f"wrote {len(ds)} regions to {args.output}")
    return 0


def cmd_score(args):
    _, table = _load_scored(args.input)
    table.to_csv(args.output)
    print(f"wrote {len(table)} rows x {len(table.names)} scores to {args.output}")
    return 0


def cmd_eval(args):
    _, table = _load_scored(args.input)
    errors = optimize.geo_score_errors(table)
    doc = {"errors": errors, "warnings": table.warnings}
    if args.output:
        _write_json(args.output, doc)
    print(f"{'score':6} {'pos_mae':>8} {'pos_max':>8} {'death_mae':>9} {'death_max':>9}")
    for name, e in errors.items():
        print(
            f"{name:6} {e['pos_score']['mae']:8.4f} {e['pos_score']['max']:8.4f} "
            f"{e['death_score']['mae']:9.4f} {e['death_score']['max']:9.4f}"
        )
    return 0


def cmd_grid(args):
    _, table = _load_scored(args.input)
    result = optimize.grid_search(table, args.target, args.step)
    out = Path(args.output)
    result.to_csv(out)
    summary = result.summary()
    summary["warnings"] = table.warnings
    _write_json(out.with_suffix(".json"), summary)
    w = result.argmin
    print(f"alpha={w.alpha:.2f} beta={w.beta:.2f} gamma={w.gamma:.2f} objective={result.min_objective:.6f}")
    for note in result.notes:
        print(f"note: {note}")
    return 0


def cmd_fit(args):
    dataset, table = _load_scored(args.input)
    start = optimize.WeightVector.from_ab(args.alpha0, args.beta0)
    train_idx, test_idx = optimize.alternating_split(dataset)
    train, test = table.rows(train_idx), table.rows(test_idx)
    targets = optimize.TARGET_ALIASES[args.target]

    report = {
        "input": str(args.input),
        "split": {"train": len(train_idx), "test": len(test_idx)},
        "hyperparameters": {
            "alpha0": args.alpha0,
            "beta0": args.beta0,
            "step_size": args.step_size,
            "tol": args.tol,
            "max_iters": args.max_iters,
            "on_boundary": args.on_boundary,
        },
        "warnings": table.warnings,
        "results": {},
    }
    rows = []
    for target in targets:
        fit = optimize.fit_subgradient(
            train, target, start, args.step_size, args.tol, args.max_iters, test=test,
            on_boundary=args.on_boundary,
        )
        ols = optimize.fit_ols(train, target, test=test)
        report["results"][target] = {
            "descent": fit.to_dict(args.trace_every),
            "ols": ols.to_dict(),
        }
        rows.append((target, fit, ols))
    _write_json(args.output, report)

    print(f"{'target':12} {'method':8} {'train_mae':>9} {'test_mae':>9}  weights")
    for target, fit, ols in rows:
        w = fit.weights
        print(
            f"{target:12} {'descent':8} {fit.train_mae:9.4f} {fit.test_mae:9.4f}  "
            f"alpha={w.alpha:.4f} beta={w.beta:.4f} gamma={w.gamma:.4f} ({fit.stop_reason}, {fit.iterations} it)"
        )
        print(
            f"{target:12} {'ols':8} {ols.train_mae:9.4f} {ols.test_mae:9.4f}  "
            f"c={ols.intercept:.4f} vacc={ols.coef_vacc:.4f} dens={ols.coef_dens:.4f} income={ols.coef_income:.4f}"
        )
    return 0


def cmd_render(args):
    table = scoring.ScoreTable.from_csv(args.input)
    if args.column not in table:
        raise GeoRiskError(f"unknown column {args.column!r}; available: {', '.join(table.names)}")
    geo = render.load_geometries(args.geo, args.geo_id_prop)
    features = render.join_geometries(table, geo)
    for rid in features.unmatched_scores:
        print(f"warning: region {rid} has no geometry and is not drawn", file=sys.stderr)
    if features.unmatched_geometries:
        print(f"warning: {len(features.unmatched_geometries)} geometries have no scores", file=sys.stderr)
    spec = render.ChoroplethSpec(args.column, args.color_low, args.color_high, args.missing_color)
    svg = render.render_svg(features, spec, args.output)
    geojson = args.geojson_output or Path(args.output).with_suffix(".geojson")
    render.write_geojson(features, geojson)
    print(f"wrote {svg} and {geojson} ({len(features.features)} regions)")
    return 0


def cmd_fetch(args):
    paths = ingest.fetch_public_data(args.source, args.out_dir)
    for p in paths:
        print(p)
    return 0


def build_parser():
    d = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="georisk", description=__doc__.splitlines()[0], formatter_class=d)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download public per-ZCTA data", formatter_class=d)
    p.add_argument("source", nargs="?", default="nyc", choices=sorted(ingest.PUBLIC_SOURCES))
    p.add_argument("--out-dir", required=True, help="directory for the raw files and manifest.json")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("synth", help="write a synthetic dataset with known weights", formatter_class=d)
    p.add_argument("--output", required=True, help="CSV path to write")
    p.add_argument("--n-regions", type=int, default=200, help="number of regions")
    p.add_argument("--weights", type=float, nargs=3, default=(0.45, 0.0, 0.55),
                   metavar=("ALPHA", "BETA", "GAMMA"), help="true mixture weights")
    p.add_argument("--noise-sd", type=float, default=0.0, help="outcome noise, score units")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="compute Geo Scores 1-7 and outcome scores", formatter_class=d)
    p.add_argument("--input", required=True, help="canonical dataset CSV")
    p.add_argument("--output", required=True, help="score table CSV to write")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="mean/max error of each Geo Score against the outcomes", formatter_class=d)
    p.add_argument("--input", required=True, help="canonical dataset CSV")
    p.add_argument("--output", help="optional JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="grid search over the weight simplex", formatter_class=d)
    p.add_argument("--input", required=True, help="canonical dataset CSV")
    p.add_argument("--target", choices=TARGETS, default="both", help="outcome(s) to fit")
    p.add_argument("--step", type=float, default=0.05, help="grid spacing; must divide 1")
    p.add_argument("--output", required=True, help="grid CSV; the JSON summary goes next to it")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("fit", help="subgradient descent vs OLS on an alternating split", formatter_class=d)
    p.add_argument("--input", required=True, help="canonical dataset CSV")
    p.add_argument("--target", choices=TARGETS, default="both", help="outcome(s) to fit")
    p.add_argument("--alpha0", type=float, default=1 / 3, help="starting vaccination weight")
    p.add_argument("--beta0", type=float, default=1 / 3, help="starting density weight")
    p.add_argument("--step-size", type=_positive(float), default=0.001, help="descent time step")
    p.add_argument("--tol", type=_positive(float), default=1e-6, help="convergence tolerance on weight change")
    p.add_argument("--max-iters", type=_positive(int), default=100_000, help="iteration cap")
    p.add_argument("--on-boundary", choices=("stop", "project"), default="stop",
                   help="stop at the first boundary contact, or keep descending along the face")
    p.add_argument("--trace-every", type=_positive(int), default=1, help="keep every m-th trace point")
    p.add_argument("--output", required=True, help="JSON report path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("render", help="choropleth SVG + GeoJSON for one score column", formatter_class=d)
    p.add_argument("--input", required=True, help="score table CSV (from `georisk score`)")
    p.add_argument("--geo", required=True, help="GeoJSON FeatureCollection of region polygons")
    p.add_argument("--geo-id-prop", default=None, help="feature property holding the region id "
                   "(default: modzcta, then ZCTA5CE10)")
    p.add_argument("--column", required=True, help="score column to map")
    p.add_argument("--output", required=True, help="SVG path to write")
    p.add_argument("--geojson-output", default=None, help="GeoJSON path (default: SVG path with .geojson)")
    p.add_argument("--color-low", default="#2C7BB6", help="fill at score 1")
    p.add_argument("--color-high", default="#D7191C", help="fill at score 10")
    p.add_argument("--missing-color", default="#BDBDBD", help="fill for missing scores")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GeoRiskError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
