"""Batch command-line front end: ingest, analyze, train, grid, forecast.

Every invocation writes its outputs plus a ``manifest.json`` into
``<out>/<command>-<seed>/``. The manifest records the fully resolved
parameters, so ``replay_manifest`` reproduces a run (and its output bytes)
from the manifest alone. All randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

from . import __version__
from .analytics import (
    GrowthDimension,
    global_stats,
    growth_to_csv,
    histogram_duration,
    histogram_throughput,
    histogram_to_csv,
    rank_subclasses,
    ranking_to_csv,
    stats_to_csv,
    yoy_growth,
)
from .chart import render_line_chart
from .errors import (
    CorruptCheckpointError,
    DdoscastError,
    DivergedNonFiniteError,
    EmptyDatasetError,
    EmptySplitError,
    NotJsonError,
    SchemaViolationError,
    SeriesTooShortError,
    SeriesTooShortForWindowError,
    VersionMismatchError,
)
from .grid import (
    DEFAULT_HIDDEN_SIZES,
    DEFAULT_WINDOW_SIZES,
    GridSpec,
    best_config,
    grid_to_csv,
    render_grid_table,
    run_grid,
)
from .ingest import (
    Subclass,
    SyntheticSpec,
    generate_synthetic,
    parse_records,
    records_to_ndjson,
)
from .lstm import (
    RmsPropState,
    TrainConfig,
    init_model,
    load_checkpoint,
    predict_series,
    save_checkpoint,
    train,
)
from .preprocess import Granularity, Metric, aggregate, enrich_all, series_for
from .windowing import NormSource, build_windowed


def _exit_code_for(exc: DdoscastError) -> int:
    if isinstance(exc, (NotJsonError, SchemaViolationError)):
        return 2
    if isinstance(exc, (EmptyDatasetError, EmptySplitError)):
        return 3
    if isinstance(exc, (SeriesTooShortForWindowError, SeriesTooShortError)):
        return 4
    if isinstance(exc, DivergedNonFiniteError):
        return 5
    if isinstance(exc, (VersionMismatchError, CorruptCheckpointError)):
        return 6
    return 1


@dataclass
class RunManifest:
    tool: str
    version: str
    command: str
    params: dict
    inputs: list[str]
    seed: int
    out_dir: str
    started_utc: str
    finished_utc: str


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: list[str], started: str):
    manifest = RunManifest(
        tool="ddoscast",
        version=__version__,
        command=command,
        params=params,
        inputs=[str(Path(p).resolve()) for p in inputs],
        seed=params["seed"],
        out_dir=str(out_dir),
        started_utc=started,
        finished_utc=dt.datetime.now(dt.timezone.utc).isoformat(),
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n"
    )


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


def _out_dir(params: dict, command: str) -> Path:
    out = Path(params["out"]) / f"{command}-{params['seed']}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_records(path: str):
    raw = Path(path).read_bytes()
    if not raw.strip():
        raise EmptyDatasetError(f"records file {path} is empty")
    records, _report = parse_records(raw)
    enriched = enrich_all(records)
    if not enriched:
        raise EmptyDatasetError(f"no valid records in {path}")
    return enriched


def _subclass_of(name: str) -> Subclass:
    try:
        return Subclass(name.replace(" ", ""))
    except ValueError:
        raise DdoscastError(
            f"unknown subclass {name!r}; choose from "
            f"{', '.join(s.value for s in Subclass)}"
        ) from None


def _load_series(records_path: str, subclass: str, metric: str):
    enriched = _read_records(records_path)
    table = aggregate(enriched, Granularity.DAILY)
    return series_for(table, _subclass_of(subclass), Metric(metric))


# --- commands ---------------------------------------------------------------


def _cmd_ingest(params: dict) -> int:
    started = _now()
    out = _out_dir(params, "ingest")
    if params["synthetic"]:
        spec = SyntheticSpec(
            record_count=params["count"],
            start_date=dt.date.fromisoformat(params["start_date"]),
            end_date=dt.date.fromisoformat(params["end_date"]),
            seed=params["seed"],
        )
        ndjson = records_to_ndjson(generate_synthetic(spec))
        records, report = parse_records(ndjson, strict=True)
        inputs = []
    else:
        raw = Path(params["input"]).read_bytes()
        records, report = parse_records(raw, strict=params["strict"])
        ndjson = records_to_ndjson(records)
        inputs = [params["input"]]

    (out / "records.ndjson").write_text(ndjson)
    (out / "parse_report.json").write_text(
        json.dumps(
            {
                "accepted": report.accepted,
                "rejected": report.rejected,
                "rejection_reasons": [list(r) for r in report.rejection_reasons],
            },
            indent=2,
        )
        + "\n"
    )
    _write_manifest(out, "ingest", params, inputs, started)
    print(f"ingest: {report.accepted} accepted, {report.rejected} rejected -> {out}")
    return 0


def _growth_years(params: dict, enriched) -> tuple[int, int]:
    """Explicit flags win; otherwise compare the two most recent years seen."""
    years = sorted({r.start_time.year for r in enriched})
    default_a = years[-2] if len(years) > 1 else years[-1]
    year_a = params["year_a"] if params["year_a"] is not None else default_a
    year_b = params["year_b"] if params["year_b"] is not None else years[-1]
    return year_a, year_b


def _cmd_analyze(params: dict) -> int:
    started = _now()
    out = _out_dir(params, "analyze")
    enriched = _read_records(params["records"])

    (out / "stats.csv").write_text(stats_to_csv(global_stats(enriched)))

    dur = histogram_to_csv(histogram_duration(enriched, per_year=True))
    thr = histogram_to_csv(histogram_throughput(enriched, per_year=True))
    body = thr.split("\n", 1)[1]  # shared header
    (out / "histogram.csv").write_text(dur + body)

    year_a, year_b = _growth_years(params, enriched)
    blocks = []
    for dim in GrowthDimension:
        csv_text = growth_to_csv(yoy_growth(enriched, year_a, year_b, dim))
        blocks.append(csv_text if not blocks else csv_text.split("\n", 1)[1])
    (out / "growth.csv").write_text("".join(blocks))

    (out / "ranking.csv").write_text(ranking_to_csv(rank_subclasses(enriched, Metric.COUNT)))

    _write_manifest(out, "analyze", params, [params["records"]], started)
    print(f"analyze: {len(enriched)} records, growth {year_a}->{year_b} -> {out}")
    return 0


def _history_csv(history) -> str:
    lines = ["epoch,train_mse,val_mse"]
    for epoch, (tr, va) in enumerate(zip(history.train_mse, history.val_mse), start=1):
        lines.append(f"{epoch},{tr!r},{va!r}")
    return "\n".join(lines) + "\n"


def _check_window_fits(n: int, window: int):
    min_split = min(n // 2, n // 5, n - n // 2 - n // 5)
    if min_split < window + 1:
        raise SeriesTooShortForWindowError(
            window,
            f"shortest split has {min_split} values; window {window} needs W+1",
        )


def _cmd_train(params: dict) -> int:
    started = _now()
    out = _out_dir(params, "train")
    series = _load_series(params["records"], params["subclass"], params["metric"])
    _check_window_fits(series.values.size, params["window"])

    norm = NormSource(params["norm_source"])
    dataset = build_windowed(series.values, params["window"], norm)
    config = TrainConfig(
        window_size=params["window"],
        hidden_size=params["hidden"],
        learning_rate=params["learning_rate"],
        epochs=params["epochs"],
        batch_size=params["batch_size"],
        seed=params["seed"],
    )
    model = init_model(config.hidden_size, config.seed)
    model, history = train(model, dataset, config)

    meta = {
        "subclass": series.subclass.value,
        "metric": series.metric.value,
        "granularity": series.granularity.value,
        "norm_source": norm.value,
    }
    # training runs to completion per invocation; accumulators restart on resume
    (out / "checkpoint.json").write_bytes(
        save_checkpoint(model, RmsPropState.zeros_like(model), config, meta)
    )
    (out / "history.csv").write_text(_history_csv(history))
    _write_manifest(out, "train", params, [params["records"]], started)
    print(
        f"train: {config.epochs} epochs, final train_mse={history.train_mse[-1]:.6f} "
        f"val_mse={history.val_mse[-1]:.6f} -> {out}"
    )
    return 0


def _cmd_grid(params: dict) -> int:
    started = _now()
    out = _out_dir(params, "grid")
    series = _load_series(params["records"], params["subclass"], params["metric"])

    base = TrainConfig(
        window_size=params["windows"][0],
        hidden_size=params["hiddens"][0],
        learning_rate=params["learning_rate"],
        epochs=params["epochs"],
        batch_size=params["batch_size"],
    )
    spec = GridSpec(
        window_sizes=tuple(params["windows"]),
        hidden_sizes=tuple(params["hiddens"]),
        base_config=base,
        master_seed=params["seed"],
        norm_source=NormSource(params["norm_source"]),
    )
    result = run_grid(series, spec)
    window, hidden = best_config(result)

    (out / "grid.csv").write_text(grid_to_csv(result))
    table = render_grid_table(result)
    (out / "grid_table.txt").write_text(
        table + f"\nrecommended: window={window} hidden={hidden}\n"
    )
    _write_manifest(out, "grid", params, [params["records"]], started)
    print(f"grid: {len(result.cells)} cells, recommended window={window} hidden={hidden} -> {out}")
    return 0


def _cmd_forecast(params: dict) -> int:
    started = _now()
    out = _out_dir(params, "forecast")
    raw = Path(params["checkpoint"]).read_bytes()
    model, _opt, config, meta = load_checkpoint(raw)

    subclass = params["subclass"] or meta.get("subclass", Subclass.TOTAL_TRAFFIC.value)
    metric = params["metric"] or meta.get("metric", Metric.COUNT.value)
    norm = NormSource(meta.get("norm_source", NormSource.FULL_SERIES.value))

    series = _load_series(params["records"], subclass, metric)
    dataset = build_windowed(series.values, config.window_size, norm)
    targets, preds = predict_series(model, dataset, "test", denormalized=True)

    offset = dataset.splits.train.size + dataset.splits.validation.size + config.window_size
    periods = series.periods[offset : offset + targets.size]

    lines = ["period,actual,predicted"]
    for period, actual, predicted in zip(periods, targets, preds):
        lines.append(f"{period},{float(actual)!r},{float(predicted)!r}")
    (out / "forecast.csv").write_text("\n".join(lines) + "\n")

    svg = render_line_chart(
        [targets.tolist(), preds.tolist()],
        ["actual", "predicted"],
        f"{subclass} {metric}: predicted vs actual (test split)",
        x_labels=list(periods),
    )
    (out / "forecast.svg").write_bytes(svg)
    _write_manifest(out, "forecast", params, [params["checkpoint"], params["records"]], started)
    print(f"forecast: {targets.size} test points -> {out}")
    return 0


_DISPATCH = {
    "ingest": _cmd_ingest,
    "analyze": _cmd_analyze,
    "train": _cmd_train,
    "grid": _cmd_grid,
    "forecast": _cmd_forecast,
}


def replay_manifest(manifest_path: str | Path, out_root: str | None = None) -> int:
    """Re-run a recorded invocation; outputs are byte-identical per seed."""
    doc = json.loads(Path(manifest_path).read_text())
    params = dict(doc["params"])
    if out_root is not None:
        params["out"] = str(out_root)
    return _DISPATCH[doc["command"]](params)


# --- argument handling ------------------------------------------------------


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DdoscastError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _as_bool(text: str) -> bool:
    return text.lower() in ("1", "true", "yes", "on")


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output root directory (default: out)")
    common.add_argument("--seed", type=int, help="master seed (default: 0)")
    common.add_argument("--strict", action="store_const", const=True, default=None,
                        help="abort on the first malformed record")
    common.add_argument("--config", help="key=value file mirroring flags; flags win")

    parser = argparse.ArgumentParser(
        prog="ddoscast",
        description="DDoS attack-record statistics and LSTM trend forecasting",
    )
    parser.add_argument("--version", action="version", version=f"ddoscast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse or synthesize a record file")
    p.add_argument("input", nargs="?", help="attack-record JSON/NDJSON export")
    p.add_argument("--synthetic", action="store_const", const=True, default=None,
                   help="generate records instead of reading a file")
    p.add_argument("--count", type=int, help="synthetic record count (default: 1000)")
    p.add_argument("--start-date", dest="start_date", help="synthetic range start (default: 2019-01-01)")
    p.add_argument("--end-date", dest="end_date", help="synthetic range end (default: 2020-12-31)")

    p = sub.add_parser("analyze", parents=[common], help="write stats/histogram/growth/ranking CSVs")
    p.add_argument("records", help="records file from ingest")
    p.add_argument("--year-a", dest="year_a", type=int, help="growth baseline year")
    p.add_argument("--year-b", dest="year_b", type=int, help="growth comparison year")

    p = sub.add_parser("train", parents=[common], help="train the forecaster on one series")
    p.add_argument("records", help="records file from ingest")
    p.add_argument("--subclass", help="attack subclass (default: TotalTraffic)")
    p.add_argument("--metric", choices=[m.value for m in Metric], help="series metric (default: count)")
    p.add_argument("--window", type=int, help="window size W (default: 24)")
    p.add_argument("--hidden", type=int, help="hidden size H (default: 64)")
    p.add_argument("--learning-rate", dest="learning_rate", type=float, help="default: 0.0002")
    p.add_argument("--epochs", type=int, help="default: 100")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="default: 32")
    p.add_argument("--norm-source", dest="norm_source",
                   choices=[s.value for s in NormSource], help="default: full_series")

    p = sub.add_parser("grid", parents=[common], help="sweep window and hidden sizes")
    p.add_argument("records", help="records file from ingest")
    p.add_argument("--subclass", help="attack subclass (default: TotalTraffic)")
    p.add_argument("--metric", choices=[m.value for m in Metric], help="series metric (default: count)")
    p.add_argument("--windows", type=_int_list, help="comma list (default: 8,16,24,32)")
    p.add_argument("--hiddens", type=_int_list, help="comma list (default: 32,64,128)")
    p.add_argument("--learning-rate", dest="learning_rate", type=float, help="default: 0.0002")
    p.add_argument("--epochs", type=int, help="default: 100")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="default: 32")
    p.add_argument("--norm-source", dest="norm_source",
                   choices=[s.value for s in NormSource], help="default: full_series")

    p = sub.add_parser("forecast", parents=[common], help="predicted-vs-actual CSV and SVG chart")
    p.add_argument("checkpoint", help="checkpoint from train")
    p.add_argument("records", help="records file from ingest")
    p.add_argument("--subclass", help="override the checkpoint's series subclass")
    p.add_argument("--metric", choices=[m.value for m in Metric],
                   help="override the checkpoint's series metric")

    return parser


_COMMON_DEFAULTS = {"out": ("out", str), "seed": (0, int), "strict": (False, _as_bool)}

_COMMAND_DEFAULTS: dict[str, dict] = {
    "ingest": {
        "input": (None, str),
        "synthetic": (False, _as_bool),
        "count": (1000, int),
        "start_date": ("2019-01-01", str),
        "end_date": ("2020-12-31", str),
    },
    "analyze": {"records": (None, str), "year_a": (None, int), "year_b": (None, int)},
    "train": {
        "records": (None, str),
        "subclass": (Subclass.TOTAL_TRAFFIC.value, str),
        "metric": (Metric.COUNT.value, str),
        "window": (24, int),
        "hidden": (64, int),
        "learning_rate": (0.0002, float),
        "epochs": (100, int),
        "batch_size": (32, int),
        "norm_source": (NormSource.FULL_SERIES.value, str),
    },
    "grid": {
        "records": (None, str),
        "subclass": (Subclass.TOTAL_TRAFFIC.value, str),
        "metric": (Metric.COUNT.value, str),
        "windows": (list(DEFAULT_WINDOW_SIZES), _int_list),
        "hiddens": (list(DEFAULT_HIDDEN_SIZES), _int_list),
        "learning_rate": (0.0002, float),
        "epochs": (100, int),
        "batch_size": (32, int),
        "norm_source": (NormSource.FULL_SERIES.value, str),
    },
    "forecast": {
        "checkpoint": (None, str),
        "records": (None, str),
        "subclass": (None, str),
        "metric": (None, str),
    },
}


def _resolve_params(args: argparse.Namespace) -> dict:
    """Flag > config-file value > built-in default."""
    config = _load_config_file(args.config)
    spec = dict(_COMMON_DEFAULTS)
    spec.update(_COMMAND_DEFAULTS[args.command])
    params = {}
    for name, (default, cast) in spec.items():
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            params[name] = flag_value
        elif name in config:
            params[name] = cast(config[name])
        else:
            params[name] = default
    return params


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        params = _resolve_params(args)
        if args.command == "ingest" and not params["synthetic"] and params["input"] is None:
            print("error: ingest needs an input file or --synthetic", file=sys.stderr)
            return 2
        return _DISPATCH[args.command](params)
    except DdoscastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
