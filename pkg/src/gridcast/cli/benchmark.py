"""Benchmark and cross-validation experiment orchestration.

Runs are independent (view, model, detrend) or (scheme, model) combinations
scheduled on a bounded thread pool; every artifact is written once, in
config order, after all runs finish, so output bytes do not depend on
completion order. Wall-clock numbers are quarantined in timing files.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..crossval import (SchemeParams, SplitPlan, dataset_size_sweep,
                        estimate_generalization_error, make_splits,
                        run_delta_eps_experiment, write_ledger_csv,
                        write_size_sweep_csv)
from ..errors import GridcastError, SeriesTooShort
from ..evaluation import metrics
from ..features import DatasetView, TrendModel, fit_trend
from ..gridstore import Series
from ..hpo import HPSpace, make_searcher
from ..models import ModelSpec, fit, predict, save_model
from . import svg
from .config import model_space
from .pipeline import DatasetBundle, PreparedData, build_view, load_dataset, prepare

METRIC_KEYS = ("mae", "mape", "rmse", "nrmse", "r2")
METRICS_HEADER = (["view", "family", "detrend"]
                  + [f"train_{k}" for k in METRIC_KEYS]
                  + [f"test_{k}" for k in METRIC_KEYS])


def with_target(view: DatasetView, values: np.ndarray) -> DatasetView:
    """Copy of the view with the target values replaced."""
    y = Series(time=view.y.time, name=view.y.name, unit=view.y.unit,
               values=np.asarray(values, dtype=np.float64))
    if view.kind == "Image":
        return DatasetView(kind=view.kind, y=y,
                           feature_names=view.feature_names,
                           X_img=view.X_img, X_scalar=view.X_scalar,
                           spec=view.spec)
    return DatasetView(kind=view.kind, y=y, feature_names=view.feature_names,
                       X_tab=view.X_tab)


def fit_target_trend(view: DatasetView, n_fit_rows: int) -> TrendModel:
    """Long-term target trend estimated on the leading rows only."""
    return fit_trend(view.y.values, [view.y.name], fit_rows=n_fit_rows)


@dataclass
class TuneOutcome:
    best_point: dict
    best_eps_hat: float
    trials: list[tuple[int, float | None, dict, str]]
    seconds: float


def tune_model(family: str, space: HPSpace, view: DatasetView, rows_fit,
               cv_params: SchemeParams, hpo_algo: str, budget: int,
               seed: int) -> TuneOutcome:
    """Pick hyperparameters by cross-validated RMSE inside the fit window."""
    rows_fit = np.asarray(rows_fit, dtype=np.int64)
    base = make_splits(len(rows_fit), cv_params)
    plan = SplitPlan(iterations=tuple(
        (rows_fit[tr], rows_fit[te]) for tr, te in base.iterations))
    searcher = make_searcher(hpo_algo, space, seed=seed)
    trials = []
    started = time.perf_counter()
    for t in range(budget):
        point = searcher.ask()
        try:
            est = estimate_generalization_error(
                ModelSpec(family=family, hyperparams=point, seed=seed),
                view, plan)
            eps_hat, error = est.eps_hat, ""
        except GridcastError as exc:
            eps_hat, error = None, f"{type(exc).__name__}: {exc}"
        searcher.tell(point, eps_hat)
        trials.append((t, eps_hat, point, error))
    seconds = time.perf_counter() - started
    done = [(e, p) for _, e, p, _ in trials if e is not None]
    if not done:
        raise GridcastError(f"every {family} tuning trial failed; first "
                            f"error: {trials[0][3]}")
    best_eps_hat, best_point = min(done, key=lambda pair: pair[0])
    return TuneOutcome(best_point=best_point, best_eps_hat=best_eps_hat,
                       trials=trials, seconds=seconds)


def _slug(view_kind: str, family: str, detrend: bool) -> str:
    return f"{view_kind.lower()}-{family}" + ("-detrended" if detrend else "")


def compatible(view_kind: str, family: str) -> bool:
    return (family == "cnn") == (view_kind == "Image")


@dataclass
class RunResult:
    view_kind: str
    family: str
    detrend: bool
    slug: str
    hyperparams: dict | None = None
    train: dict | None = None
    test: dict | None = None
    trials: list | None = None
    seconds: float = 0.0
    predictions: tuple | None = None   # (timestamps, y, yhat) on test rows
    error: str | None = None
    fitted: object | None = None


def run_one(view: DatasetView, prepared: PreparedData, view_kind: str,
            entry: dict, detrend: bool, config: dict) -> RunResult:
    family = entry["family"]
    result = RunResult(view_kind=view_kind, family=family, detrend=detrend,
                       slug=_slug(view_kind, family, detrend))
    try:
        rows_fit = np.concatenate([prepared.train_rows, prepared.val_rows])
        rows_test = prepared.test_rows
        y_true = view.y.values
        trend = None
        fit_view = view
        if detrend:
            trend = fit_target_trend(view, n_fit_rows=len(rows_fit))
            fit_view = with_target(view, trend.detrend(y_true))

        space = model_space(entry)
        fixed = entry.get("hyperparams", {})
        if space.encoded_dim == 0 and not space.dims:
            outcome = None
            point = dict(fixed)
        else:
            outcome = tune_model(family, space, fit_view, rows_fit,
                                 SchemeParams(**config["cv"]),
                                 config["hpo"]["algo"],
                                 config["hpo"]["budget"], config["seed"])
            point = dict(fixed) | outcome.best_point
            result.trials = outcome.trials
            result.seconds = outcome.seconds

        spec = ModelSpec(family=family, hyperparams=point,
                         seed=config["seed"])
        started = time.perf_counter()
        fitted = fit(spec, fit_view, rows_fit)
        result.seconds += time.perf_counter() - started
        result.hyperparams = point

        def score(rows):
            yhat = predict(fitted, fit_view, rows)
            if trend is not None:
                yhat = yhat + trend.trend[rows, 0]
            return yhat

        yhat_train, yhat_test = score(rows_fit), score(rows_test)
        result.train = metrics(y_true[rows_fit], yhat_train,
                               tolerate_zeros=True).as_dict()
        result.test = metrics(y_true[rows_test], yhat_test,
                              tolerate_zeros=True).as_dict()
        stamps = [view.y.time.timestamp(int(r)) for r in rows_test]
        result.predictions = (stamps, y_true[rows_test], yhat_test)
        result.fitted = fitted
    except Exception as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cell(value) -> str:
    return "" if value is None else repr(float(value))


def _write_predictions(path: Path, stamps, y, yhat) -> None:
    rows = [[t.strftime("%Y-%m-%dT%H:%M:%SZ"), repr(float(a)),
             repr(float(b))] for t, a, b in zip(stamps, y, yhat)]
    _write_csv(path, ["timestamp_utc", "power_mw", "prediction_mw"], rows)


def _write_trials(path: Path, trials) -> None:
    rows = [[t, _cell(eps_hat), json.dumps(point, sort_keys=True), error]
            for t, eps_hat, point, error in trials]
    _write_csv(path, ["trial_id", "eps_hat_mw", "hyperparams_json", "error"],
               rows)


def run_benchmark(config: dict, out_dir, jobs: int = 1) -> dict:
    """Tune/refit/score every configured combination; emit the report tree."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    (out / "charts").mkdir(exist_ok=True)
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    views = {kind: build_view(prepared, kind,
                              n_components=config.get("n_components", 8))[0]
             for kind in dict.fromkeys(config["views"])}
    combos = [(kind, entry, dt)
              for kind in config["views"]
              for entry in config["models"]
              for dt in config["detrend"]
              if compatible(kind, entry["family"])]

    def job(combo):
        kind, entry, dt = combo
        return run_one(views[kind], prepared, kind, entry, dt, config)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(job, combos))
    else:
        results = [job(c) for c in combos]

    metric_rows, timing_rows, failure_rows = [], [], []
    nrmse_series = []
    for res in results:
        run_dir = out / "runs" / res.slug
        run_dir.mkdir(exist_ok=True)
        if res.error is not None:
            failure_rows.append([res.view_kind, res.family,
                                 str(res.detrend).lower(), res.error])
            continue
        metric_rows.append(
            [res.view_kind, res.family, str(res.detrend).lower()]
            + [_cell(res.train[k]) for k in METRIC_KEYS]
            + [_cell(res.test[k]) for k in METRIC_KEYS])
        timing_rows.append([res.view_kind, res.family,
                            str(res.detrend).lower(), repr(res.seconds),
                            len(res.trials or [])])
        if res.trials is not None:
            _write_trials(run_dir / "trials.csv", res.trials)
        (run_dir / "hyperparams.json").write_text(
            json.dumps(res.hyperparams, sort_keys=True) + "\n",
            encoding="utf-8")
        save_model(res.fitted, run_dir / "model")
        stamps, y, yhat = res.predictions
        _write_predictions(run_dir / "predictions.csv", stamps, y, yhat)
        xs = list(range(len(y)))
        chart = svg.xy_chart([("actual", xs, [float(v) for v in y]),
                              ("predicted", xs, [float(v) for v in yhat])],
                             title=f"{res.slug}: test window",
                             x_label="test day", y_label="power (MW)")
        svg.save_svg(out / "charts" / f"{res.slug}_predictions.svg", chart)
        nrmse_series.append((res.slug, float(res.test["nrmse"])))

    _write_csv(out / "metrics.csv", METRICS_HEADER, metric_rows)
    _write_csv(out / "timing.csv",
               ["view", "family", "detrend", "seconds", "n_trials"],
               timing_rows)
    if failure_rows:
        _write_csv(out / "failures.csv", ["view", "family", "detrend", "error"],
                   failure_rows)
    if nrmse_series:
        labels = [s for s, _ in nrmse_series]
        chart = svg.xy_chart(
            [("test nRMSE (%)", list(range(len(labels))),
              [v for _, v in nrmse_series])],
            title="test nRMSE by run", x_label="run index", y_label="nRMSE (%)")
        chart.extend(svg.text(636, 404 - 12 * k, f"{k}: {label}", size=9,
                              anchor="end")
                     for k, label in enumerate(reversed(labels)))
        svg.save_svg(out / "charts" / "test_nrmse.svg", chart)
    return {"n_runs": len(combos), "n_failed": len(failure_rows),
            "metrics": metric_rows}


def run_cv_bench(config: dict, out_dir, jobs: int = 1) -> dict:
    """Delta-ledger experiments for every (scheme, model) pair."""
    out = Path(out_dir)
    (out / "ledgers").mkdir(parents=True, exist_ok=True)
    bundle = load_dataset(config["data_dir"])
    prepared = prepare(config, bundle)
    view = build_view(prepared, config["views"][0],
                      n_components=config.get("n_components", 8))[0]
    if config["detrend"][0]:
        trend = fit_target_trend(view, n_fit_rows=len(prepared.train_rows))
        view = with_target(view, trend.detrend(view.y.values))
    schemes = [SchemeParams(**s) for s in config.get("schemes",
                                                     [config["cv"]])]
    budget = config["hpo"]["budget"]
    pairs = [(sch, entry) for sch in schemes for entry in config["models"]
             if compatible(config["views"][0], entry["family"])]

    def job(pair):
        sch, entry = pair
        return run_delta_eps_experiment(
            entry["family"], model_space(entry), view, prepared.train_rows,
            prepared.val_rows, sch, hpo_algo=config["hpo"]["algo"],
            n_trials=budget, seed=config["seed"],
            model_seed=config["seed"])

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            ledgers = list(pool.map(job, pairs))
    else:
        ledgers = [job(p) for p in pairs]
    for (sch, entry), ledger in zip(pairs, ledgers):
        write_ledger_csv(ledger,
                         out / "ledgers" / f"{sch.label}_{entry['family']}.csv")

    if "sizes" in config:
        entry = config["models"][0]
        for sch in schemes:
            sweep = dataset_size_sweep(
                entry["family"], model_space(entry), view, config["sizes"],
                prepared.train_rows, prepared.val_rows, sch,
                hpo_algo=config["hpo"]["algo"],
                n_trials=min(budget, 20), seed=config["seed"],
                model_seed=config["seed"])
            write_size_sweep_csv(sweep, out / f"size_sweep_{sch.label}.csv")
    return {"n_ledgers": len(ledgers)}
