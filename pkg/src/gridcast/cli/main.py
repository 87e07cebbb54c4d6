"""Command-line entry point.

Every subcommand reads a JSON config, validates it against the schema, and
writes its artifacts under `<out>/<run_id>/` together with a manifest that
records the command, the config hash, and every file produced. Exit codes:
0 success, 1 a run failed, 2 the config was invalid.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, GridcastError
from ..models import fit, load_model, predict
from ..models.base import ModelSpec
from . import benchmark as bench
from . import report as report_mod
from .config import (canonical_json, config_hash, load_config_file,
                     model_space, run_id, validate_experiment, validate_synth)
from .pipeline import build_view, load_dataset, prepare
from .synth import synth_generate

EXPERIMENT_COMMANDS = ("ingest", "features", "cv-bench", "hpo", "train",
                       "predict", "benchmark")


def _write_manifest(command: str, config: dict, run_dir: Path) -> None:
    artifacts = sorted(str(p.relative_to(run_dir))
                       for p in run_dir.rglob("*")
                       if p.is_file() and p.name != "manifest.json")
    doc = {"command": command, "config_sha256": config_hash(config),
           "artifacts": artifacts, "config": config}
    (run_dir / "manifest.json").write_text(canonical_json(doc) + "\n",
                                           encoding="utf-8")


def _cmd_synth(config: dict, run_dir: Path, jobs: int) -> int:
    synth_generate(config, run_dir)
    return 0


def _cmd_ingest(config: dict, run_dir: Path, jobs: int) -> int:
    """Weighted spatial averages, extra features, and the variable selection."""
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    view, _ = build_view(prepared, "Average")
    time = bundle.time
    with open(run_dir / "averages.csv", "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("timestamp_utc," + ",".join(view.feature_names) + "\n")
        for k in range(time.nt):
            stamp = time.timestamp(k).strftime("%Y-%m-%dT%H:%M:%SZ")
            cells = ",".join(repr(float(v)) for v in view.X_tab[k])
            fh.write(f"{stamp},{cells}\n")
    scores = prepared.mi_scores or {}
    doc = {"selected": list(prepared.selected),
           "scores": {k: float(v) for k, v in scores.items()}}
    (run_dir / "selection.json").write_text(canonical_json(doc) + "\n",
                                            encoding="utf-8")
    return 0


def _cmd_features(config: dict, run_dir: Path, jobs: int) -> int:
    """Materialize every configured view as a reloadable directory."""
    from ..features import save_view
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    for kind in dict.fromkeys(config["views"]):
        view, _ = build_view(prepared, kind,
                             n_components=config.get("n_components", 8))
        save_view(view, run_dir / "views" / kind.lower())
    return 0


def _cmd_cv_bench(config: dict, run_dir: Path, jobs: int) -> int:
    bench.run_cv_bench(config, run_dir, jobs=jobs)
    report_mod.render_report(run_dir)
    return 0


def _fit_combos(config: dict):
    return [(kind, entry, dt)
            for kind in config["views"]
            for entry in config["models"]
            for dt in config["detrend"]
            if bench.compatible(kind, entry["family"])]


def _cmd_hpo(config: dict, run_dir: Path, jobs: int) -> int:
    """Search hyperparameters for every combination; keep trials and winners."""
    from ..crossval import SchemeParams
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    rows_fit = np.concatenate([prepared.train_rows, prepared.val_rows])
    best: dict[str, dict] = {}
    for kind, entry, dt in _fit_combos(config):
        space = model_space(entry)
        if not space.dims:
            continue
        view, _ = build_view(prepared, kind,
                             n_components=config.get("n_components", 8))
        if dt:
            trend = bench.fit_target_trend(view, n_fit_rows=len(rows_fit))
            view = bench.with_target(view, trend.detrend(view.y.values))
        slug = f"{kind.lower()}-{entry['family']}" + ("-detrended" if dt else "")
        outcome = bench.tune_model(entry["family"], space, view, rows_fit,
                                   SchemeParams(**config["cv"]),
                                   config["hpo"]["algo"],
                                   config["hpo"]["budget"], config["seed"])
        bench._write_trials(run_dir / f"{slug}_trials.csv", outcome.trials)
        best[slug] = {"hyperparams": outcome.best_point,
                      "eps_hat_mw": outcome.best_eps_hat}
    (run_dir / "best.json").write_text(canonical_json(best) + "\n",
                                       encoding="utf-8")
    return 0


def _cmd_train(config: dict, run_dir: Path, jobs: int) -> int:
    """Tune (when a space is searchable), refit, and save every model."""
    from ..crossval import SchemeParams
    from ..models import save_model
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    rows_fit = np.concatenate([prepared.train_rows, prepared.val_rows])
    for kind, entry, dt in _fit_combos(config):
        view, _ = build_view(prepared, kind,
                             n_components=config.get("n_components", 8))
        trend = None
        if dt:
            trend = bench.fit_target_trend(view, n_fit_rows=len(rows_fit))
            view = bench.with_target(view, trend.detrend(view.y.values))
        slug = f"{kind.lower()}-{entry['family']}" + ("-detrended" if dt else "")
        space = model_space(entry)
        point = dict(entry.get("hyperparams", {}))
        if space.dims:
            outcome = bench.tune_model(entry["family"], space, view, rows_fit,
                                       SchemeParams(**config["cv"]),
                                       config["hpo"]["algo"],
                                       config["hpo"]["budget"],
                                       config["seed"])
            point |= outcome.best_point
        fitted = fit(ModelSpec(family=entry["family"], hyperparams=point,
                               seed=config["seed"]), view, rows_fit)
        prefix = run_dir / "models" / slug
        save_model(fitted, prefix)
        meta = {"view": kind, "family": entry["family"], "detrend": dt,
                "hyperparams": point}
        prefix.with_suffix(".meta.json").write_text(
            canonical_json(meta) + "\n", encoding="utf-8")
        if trend is not None:
            np.save(prefix.with_suffix(".trend.npy"), trend.trend)
    return 0


def _cmd_predict(config: dict, run_dir: Path, jobs: int) -> int:
    """Score saved models over the whole dataset window."""
    from ..errors import MissingArtifacts
    model_dir = Path(config.get("model_dir", ""))
    metas = sorted(model_dir.glob("models/*.meta.json")) \
        or sorted(model_dir.glob("*.meta.json"))
    if not metas:
        raise MissingArtifacts(f"no saved models under {model_dir}")
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    time = bundle.time
    for meta_path in metas:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        prefix = meta_path.with_suffix("").with_suffix("")
        fitted = load_model(prefix)
        view, _ = build_view(prepared, meta["view"],
                             n_components=config.get("n_components", 8))
        rows = np.arange(time.nt)
        yhat = predict(fitted, view, rows)
        trend_path = prefix.with_suffix(".trend.npy")
        if trend_path.exists():
            yhat = yhat + np.load(trend_path)[:, 0]
        out = run_dir / f"{prefix.name}_predictions.csv"
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("timestamp_utc,prediction_mw\n")
            for k in range(time.nt):
                stamp = time.timestamp(k).strftime("%Y-%m-%dT%H:%M:%SZ")
                fh.write(f"{stamp},{float(yhat[k])!r}\n")
    return 0


def _cmd_benchmark(config: dict, run_dir: Path, jobs: int) -> int:
    summary = bench.run_benchmark(config, run_dir, jobs=jobs)
    return 1 if summary["n_failed"] else 0


def _cmd_report(config: dict, run_dir: Path, jobs: int) -> int:
    source = Path(config["run_dir"])
    artifacts = report_mod.render_report(source)
    doc = {"source": str(source), "artifacts": artifacts}
    (run_dir / "report.json").write_text(canonical_json(doc) + "\n",
                                         encoding="utf-8")
    return 0


_HANDLERS = {
    "synth": (_cmd_synth, "synthetic dataset generation"),
    "ingest": (_cmd_ingest, "weighted averages and variable selection"),
    "features": (_cmd_features, "materialize dataset views"),
    "cv-bench": (_cmd_cv_bench, "estimate-vs-outcome CV experiments"),
    "hpo": (_cmd_hpo, "hyperparameter search only"),
    "train": (_cmd_train, "tune, fit and save models"),
    "predict": (_cmd_predict, "score saved models on a dataset"),
    "benchmark": (_cmd_benchmark, "full tune/refit/score matrix"),
    "report": (_cmd_report, "render charts from a finished run"),
}


def _validated(command: str, config: dict) -> dict:
    if command == "synth":
        return validate_synth(config)
    if command == "report":
        if not isinstance(config.get("run_dir"), str):
            raise ConfigError("report config: 'run_dir' (string) is required")
        return config
    return validate_experiment(config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcast",
        description="renewable power forecasting benchmark toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _HANDLERS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None,
                       help="output root (default: config out_dir or '.')")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker threads (env GRIDCAST_JOBS wins)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config_file(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        config = _validated(args.command, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    jobs = args.jobs
    env_jobs = os.environ.get("GRIDCAST_JOBS")
    if env_jobs is not None:
        try:
            jobs = int(env_jobs)
        except ValueError:
            print(f"config error: GRIDCAST_JOBS={env_jobs!r} is not an "
                  "integer", file=sys.stderr)
            return 2
    out_base = Path(args.out or config.get("out_dir") or ".")
    run_dir = out_base / run_id(args.command, config)
    run_dir.mkdir(parents=True, exist_ok=True)
    handler, _ = _HANDLERS[args.command]
    try:
        code = handler(config, run_dir, max(1, jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GridcastError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write_manifest(args.command, config, run_dir)
    print(run_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
