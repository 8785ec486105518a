"""Command-line entry point: ingest -> select -> train -> evaluate ->
experiment -> serve, as composable subcommands.

Exit codes: 0 success, 1 invalid arguments or parameters, 2 data errors
(unreadable or malformed inputs). All outputs are written atomically, and
every subcommand is idempotent given identical inputs and seed. A config
file (``key = value`` per line, flag names without the leading dashes) may
set any flag; explicit command-line flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .classify import ClassifierSpec, fit
from .data import (
    MISSING,
    NOMINAL,
    DataError,
    Dataset,
    Instance,
    partition_by,
    project,
)
from .evaluate import (
    ClimateTable,
    correlate_external,
    cross_validate,
    hold_one_state_out,
    parse_grid,
    per_state_experiment,
    resample,
    write_experiment_reports,
)
from .featsel import leave_one_out_selection, rank_attributes
from .ingest import (
    CostTable,
    LayoutSchema,
    ParseOptions,
    SeismicGrid,
    add_average_span,
    attach_costs,
    attach_seismic,
    load_deflator,
    parse_nbi,
)
from .io import atomic_write_text, format_number, read_dataset, write_dataset
from .modelio import inspect_text, load_model, save_model

PROG = "bridgekit"


class CliError(Exception):
    """Bad arguments or parameters; maps to exit code 1."""


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'flag = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _active_subparser(parser: argparse.ArgumentParser,
                      namespace: argparse.Namespace) -> argparse.ArgumentParser:
    current = parser
    for attr in ("command", "model_command"):
        name = getattr(namespace, attr, None)
        if name is None:
            break
        subaction = next((a for a in current._actions
                          if isinstance(a, argparse._SubParsersAction)), None)
        if subaction is None or name not in subaction.choices:
            break
        current = subaction.choices[name]
    return current


def _apply_config(parser: argparse.ArgumentParser, args: list[str]) -> argparse.Namespace:
    """Parse args with config-file defaults; the command line overrides.

    The experiment subcommand's --config is its grid definition, not a
    flag-defaults file, and is left alone here.
    """
    pre, _ = parser.parse_known_args(args)
    if getattr(pre, "config", None) and not getattr(pre, "config_is_grid", False):
        subparser = _active_subparser(parser, pre)
        raw = _read_config(pre.config)
        valid = {a.dest for a in subparser._actions}
        unknown = set(raw) - valid
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for action in subparser._actions:
            if action.dest in raw:
                value = raw[action.dest]
                if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                    coerced[action.dest] = value.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    coerced[action.dest] = action.type(value)
                else:
                    coerced[action.dest] = value
        subparser.set_defaults(**coerced)
    return parser.parse_args(args)


def _spec_from_args(args: argparse.Namespace) -> ClassifierSpec:
    params = {}
    kind = args.spec
    if kind == "dtree":
        params = {
            "confidence": args.confidence,
            "min_objects": args.min_objects,
            "subtree_raising": not args.no_subtree_raising,
            "reduced_error": args.reduced_error,
            "folds": args.prune_folds,
        }
    elif kind == "bayesnet":
        params = {"max_parents": args.max_parents, "alpha": args.alpha}
    elif kind != "oner":
        raise CliError(f"unknown spec {kind!r} (use dtree, bayesnet, or oner)")
    spec = ClassifierSpec(kind, params, seed=args.seed)
    try:
        spec.resolved_params()
    except DataError as exc:
        raise CliError(str(exc)) from None
    return spec


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", default="dtree", help="classifier kind: dtree, bayesnet, oner")
    p.add_argument("--confidence", type=float, default=0.35,
                   help="decision tree pruning confidence factor")
    p.add_argument("--min-objects", type=int, default=2,
                   help="minimum weighted instances per tree leaf")
    p.add_argument("--no-subtree-raising", action="store_true",
                   help="disable subtree raising during pruning")
    p.add_argument("--reduced-error", action="store_true",
                   help="use reduced-error pruning on a held-out fraction")
    p.add_argument("--prune-folds", type=int, default=3,
                   help="fraction held out by reduced-error pruning (1/folds)")
    p.add_argument("--max-parents", type=int, default=2,
                   help="network parent cap per node (class arc included)")
    p.add_argument("--alpha", type=float, default=0.5,
                   help="CPT smoothing prior weight")


def _load_data(args) -> Dataset:
    data_dir = Path(args.data)
    csv_path = data_dir / "dataset.csv" if data_dir.is_dir() else data_dir
    d = read_dataset(csv_path)
    if getattr(args, "state", None):
        parts = partition_by(d, args.state_attr)
        if args.state not in parts.parts:
            raise DataError(f"state {args.state!r} has no instances")
        d = parts.parts[args.state]
    if getattr(args, "attrs", None):
        keep = [a.strip() for a in args.attrs.split(",") if a.strip()]
        d = project(d, keep)
    return d


# -- subcommand implementations -------------------------------------------------


def _cmd_ingest(args) -> int:
    layout = LayoutSchema.load(args.layout)
    opts = ParseOptions(
        class_field=args.class_field,
        meta_fields=tuple(f.strip() for f in args.meta_fields.split(",") if f.strip()),
        post_1971=args.post_1971,
        year_field=args.year_field,
        exclude_states=tuple(s.strip() for s in args.exclude_states.split(",") if s.strip()),
        state_field=args.state_field,
        dedupe_on=args.dedupe_on or None,
    )
    d, report = parse_nbi(args.nbi, layout, opts)
    if args.avg_span:
        d = add_average_span(d, args.length_field, args.spans_field)
    if args.seismic:
        d = attach_seismic(d, SeismicGrid.load(args.seismic),
                           lat_attr=args.lat_field, lon_attr=args.lon_field)
    if args.costs:
        deflator = load_deflator(args.deflator) if args.deflator else None
        d = attach_costs(d, CostTable.load(args.costs, deflator),
                         lat_attr=args.lat_field, lon_attr=args.lon_field,
                         year_attr=args.year_field)
    out = Path(args.out)
    write_dataset(d, out / "dataset.csv", out / "dataset.schema")
    atomic_write_text(out / "rejects.csv", report.to_csv_text())
    counts = report.counts()
    print(f"accepted {len(d)} instances; rejected {len(report.rejects)} "
          f"({json.dumps(counts, sort_keys=True)})")
    return 0


def _cmd_select(args) -> int:
    d = _load_data(args)
    chi = {s.attribute: s for s in rank_attributes(d, "chi2")}
    gain = {s.attribute: s.score for s in rank_attributes(d, "infogain")}
    ranked = sorted(chi.values(), key=lambda s: -s.score)
    lines = ["attribute,chi2_score,infogain_score,kept_chi2"]
    loo = None
    if args.loo:
        spec = _spec_from_args(args)
        loo = leave_one_out_selection(d, spec, threshold=args.threshold,
                                      k=args.folds, seed=args.seed)
        lines[0] += ",loo_recall_impact,essential,kept_final"
    for s in ranked:
        row = (f"{s.attribute},{format_number(round(s.score, 6))},"
               f"{format_number(round(gain[s.attribute], 6))},{str(s.kept).lower()}")
        if loo is not None:
            essential = s.attribute in loo.essential
            row += (f",{format_number(round(loo.recall_impact[s.attribute], 4))},"
                    f"{str(essential).lower()},{str(s.kept or essential).lower()}")
        lines.append(row)
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(ranked)} attributes)")
    return 0


def _cmd_train(args) -> int:
    d = _load_data(args)
    spec = _spec_from_args(args)
    metadata = {
        "state": args.state or "national",
        "trained_at": time.strftime("%Y-%m-%d", time.gmtime(0)) if args.reproducible
        else time.strftime("%Y-%m-%d"),
        "instances": len(d),
    }
    if not args.no_cv:
        report = cross_validate(d, spec, k=args.folds, seed=args.seed, bias=args.bias,
                                resample_whole=args.resample_whole_dataset)
        metadata["cv_recall"] = round(report.weighted_recall, 6)
        metadata["cv_precision"] = round(report.weighted_precision, 6)
    if args.bias is not None:
        d = resample(d, args.bias, seed=args.seed)
    model = fit(spec, d)
    save_model(model, args.out, metadata)
    print(f"wrote {args.out}" + (f" (cv recall {metadata['cv_recall']:.4f})"
                                 if "cv_recall" in metadata else ""))
    return 0


def _instance_from_row(schema, header, row) -> Instance:
    by_name = dict(zip(header, row))
    values = []
    for attr in schema:
        raw = by_name.get(attr.name, "")
        raw = raw.strip() if isinstance(raw, str) else raw
        if raw in ("", "?", None):
            values.append(MISSING)
        elif attr.kind == NOMINAL:
            if raw not in attr.values:
                values.append(MISSING)
            else:
                values.append(attr.values.index(raw))
        else:
            values.append(float(raw))
    return Instance(tuple(values))


def _cmd_predict(args) -> int:
    import csv as _csv

    model, metadata = load_model(args.model)
    grid = SeismicGrid.load(args.seismic) if args.seismic else None
    with open(args.instance, encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    feature_names = [a.name for a in model.schema if a.role == "feature"]
    for row in rows:
        by_name = dict(zip(header, row))
        if grid is not None and "seismic_pga" in feature_names \
                and by_name.get("seismic_pga", "") in ("", "?") \
                and by_name.get("latitude") and by_name.get("longitude"):
            pga = grid.lookup(float(by_name["latitude"]), float(by_name["longitude"]))
            if pga is not None:
                by_name["seismic_pga"] = repr(pga)
                header = list(by_name)
                row = list(by_name.values())
        x = _instance_from_row(model.schema, header, row)
        dist = model.predict_distribution(x)
        print(json.dumps({
            "distribution": [{"class": c, "p": p} for c, p in dist.ranked()],
            "explanation": model.explain_instance(x),
        }, sort_keys=True))
    return 0


def _cmd_evaluate(args) -> int:
    d = _load_data(args)
    spec = _spec_from_args(args)
    out = Path(args.out)
    if args.hold_one_state_out:
        summary = hold_one_state_out(d, spec, state_attr=args.state_attr, seed=args.seed)
        doc = {
            "protocol": "hold-one-state-out",
            "mean_recall": summary.mean_recall,
            "std_recall": summary.std_recall,
            "mean_precision": summary.mean_precision,
            "std_precision": summary.std_precision,
            "states": {s: r.to_dict() for s, r in summary.reports.items()},
        }
    else:
        report = cross_validate(d, spec, k=args.folds, seed=args.seed, bias=args.bias,
                                resample_whole=args.resample_whole_dataset)
        doc = report.to_dict()
    atomic_write_text(out / "report.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")
    if args.hold_one_state_out:
        print(f"mean recall {doc['mean_recall']:.4f} (std {doc['std_recall']:.4f}); "
              f"wrote {out / 'report.json'}")
    else:
        print(f"recall {doc['weighted_recall']:.4f} precision {doc['weighted_precision']:.4f}; "
              f"wrote {out / 'report.json'}")
    return 0


def _cmd_experiment(args) -> int:
    d = read_dataset(Path(args.data) / "dataset.csv" if Path(args.data).is_dir() else args.data)
    cells = parse_grid(Path(args.config).read_text(encoding="utf-8"))
    result = per_state_experiment(d, cells, state_attr=args.state_attr)
    written = write_experiment_reports(result, args.out)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def _cmd_correlate(args) -> int:
    summary = json.loads(Path(args.summary).read_text(encoding="utf-8"))
    cells = summary.get("cells", {})
    if args.cell not in cells:
        raise DataError(f"summary has no cell {args.cell!r}")
    recalls = {s: r["weighted_recall"]
               for s, r in cells[args.cell]["states"].items()}
    climate = ClimateTable.from_csv(args.climate)
    out = correlate_external(recalls, climate)
    lines = ["parameter,pearson_r"]
    for param, r in out.items():
        lines.append(f"{param},{'undefined' if r is None else format_number(round(r, 6))}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def _cmd_model_inspect(args) -> int:
    model, metadata = load_model(args.model)
    sys.stdout.write(inspect_text(model, metadata))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ModelRegistry, create_app

    registry = ModelRegistry(args.models)
    grid = SeismicGrid.load(args.seismic) if args.seismic else None
    app = create_app(registry, grid)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--config", help="config file of flag = value defaults")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        if data:
            p.add_argument("--data", required=True,
                           help="dataset directory (dataset.csv + dataset.schema) or CSV path")

    p = sub.add_parser("ingest", help="parse a fixed-width inventory and fuse attributes")
    p.add_argument("--nbi", required=True, help="fixed-width inventory file")
    p.add_argument("--layout", required=True, help="layout schema: name,start,end,type[,scale]")
    p.add_argument("--seismic", help="gridded acceleration file: lon lat pga")
    p.add_argument("--costs", help="cost table CSV: city,lat,lon,year,steel,concrete")
    p.add_argument("--deflator", help="deflator CSV: year,multiplier")
    p.add_argument("--post-1971", action="store_true",
                   help="reject bridges built 1971 or earlier")
    p.add_argument("--class-field", default="design_type")
    p.add_argument("--meta-fields", default="structure_id,state,year_built,latitude,longitude")
    p.add_argument("--exclude-states", default="", help="region codes to reject")
    p.add_argument("--dedupe-on", default="", help="reject repeated values of this field")
    p.add_argument("--year-field", default="year_built")
    p.add_argument("--state-field", default="state")
    p.add_argument("--lat-field", default="latitude")
    p.add_argument("--lon-field", default="longitude")
    p.add_argument("--avg-span", action="store_true",
                   help="derive average span length from total length / span count")
    p.add_argument("--length-field", default="total_length")
    p.add_argument("--spans-field", default="spans")
    p.add_argument("--config", help="config file of flag = value defaults")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("select", help="rank attributes and run leave-one-out selection")
    common(p)
    p.add_argument("--state", help="restrict to one state")
    p.add_argument("--state-attr", default="state")
    p.add_argument("--attrs", help="comma-separated feature subset")
    p.add_argument("--loo", action="store_true", help="also run leave-one-attribute-out")
    p.add_argument("--threshold", type=float, default=1.0,
                   help="essentialness threshold in recall points")
    p.add_argument("--folds", type=int, default=10)
    _add_spec_flags(p)
    p.set_defaults(spec="bayesnet")
    p.add_argument("--out", required=True, help="output CSV of ranked scores")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("train", help="fit a model and write a model file")
    common(p)
    p.add_argument("--state", help="train on one state only")
    p.add_argument("--state-attr", default="state")
    p.add_argument("--attrs", help="comma-separated feature subset")
    _add_spec_flags(p)
    p.add_argument("--folds", type=int, default=10, help="folds for the recorded CV recall")
    p.add_argument("--bias", type=float, help="resampling bias toward uniform classes")
    p.add_argument("--resample-whole-dataset", action="store_true",
                   help="resample before folding instead of per training fold")
    p.add_argument("--no-cv", action="store_true", help="skip the CV recall metadata")
    p.add_argument("--reproducible", action="store_true",
                   help="write a fixed training date for byte-identical outputs")
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="predict design-type distributions for instances")
    p.add_argument("--model", required=True)
    p.add_argument("--instance", required=True, help="CSV of feature values ('?' = missing)")
    p.add_argument("--seismic", help="grid file for lat/lon hazard lookup")
    p.add_argument("--config", help="config file of flag = value defaults")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="cross-validate or hold-one-state-out")
    common(p)
    p.add_argument("--state", help="evaluate one state only")
    p.add_argument("--state-attr", default="state")
    p.add_argument("--attrs", help="comma-separated feature subset")
    _add_spec_flags(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--bias", type=float, help="resampling bias toward uniform classes")
    p.add_argument("--resample-whole-dataset", action="store_true")
    p.add_argument("--hold-one-state-out", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="run a declarative experiment grid")
    common(p, data=True)
    p.add_argument("--state-attr", default="state")
    p.add_argument("--out", required=True, help="output directory for table CSVs")
    p.set_defaults(func=_cmd_experiment, config_is_grid=True)
    # experiment reads its grid from --config (required here)
    for action in p._actions:
        if action.dest == "config":
            action.help = "experiment grid file (INI sections, one per cell)"
            action.required = True

    p = sub.add_parser("correlate", help="Pearson correlation of per-state recall vs climate")
    p.add_argument("--summary", required=True, help="summary.json from an experiment run")
    p.add_argument("--cell", required=True, help="grid cell whose recalls to correlate")
    p.add_argument("--climate", required=True, help="climate CSV: state,temp,humidity,rain,snow")
    p.add_argument("--config", help="config file of flag = value defaults")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("model", help="model file utilities")
    msub = p.add_subparsers(dest="model_command", required=True)
    mi = msub.add_parser("inspect", help="print the human-readable model structure")
    mi.add_argument("--model", required=True)
    mi.add_argument("--config", help="config file of flag = value defaults")
    mi.set_defaults(func=_cmd_model_inspect)

    p = sub.add_parser("serve", help="serve trained models over HTTP")
    p.add_argument("--models", required=True, help="directory of *.model files")
    p.add_argument("--seismic", help="grid file for lat/lon hazard lookup")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--config", help="config file of flag = value defaults")
    p.set_defaults(func=_cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    except CliError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except CliError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
