"""Generalization-error estimation and the estimate-vs-outcome experiment.

For a trial with hyperparameters h: eps_hat is the cross-validated RMSE of
h inside the train window, eps is the RMSE of h refit on the whole train
window and scored on the held-out validation window, and delta = eps -
eps_hat measures how optimistic the CV scheme was.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np

from ..errors import ObjectiveFailure, SchemaMismatch, SizeExceedsWindow, WindowOutOfRange
from ..features import DatasetView
from ..hpo import HPSpace, make_searcher
from ..models import ModelSpec, fit, predict
from .schemes import SchemeParams, SplitPlan, make_splits


def _rmse(y: np.ndarray, yhat: np.ndarray) -> float:
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


@dataclass(frozen=True)
class CVEstimate:
    eps_hat: float
    fold_rmse: tuple[float, ...]
    n_fits: int


def _annotated(exc: Exception, iteration: int) -> Exception:
    message = f"cv iteration {iteration}: {exc}"
    try:
        return type(exc)(message)
    except Exception:
        return ObjectiveFailure(message)


def estimate_generalization_error(spec: ModelSpec, view: DatasetView,
                                  plan: SplitPlan) -> CVEstimate:
    """Mean test-fold RMSE over the plan's iterations."""
    fold_rmse = []
    for k, (train, test) in enumerate(plan.iterations):
        try:
            fitted = fit(spec, view, train)
            pred = predict(fitted, view, test)
        except Exception as exc:
            raise _annotated(exc, k) from exc
        fold_rmse.append(_rmse(view.y.values[test], pred))
    return CVEstimate(eps_hat=float(np.mean(fold_rmse)),
                      fold_rmse=tuple(fold_rmse),
                      n_fits=len(plan.iterations))


@dataclass(frozen=True)
class TrialRow:
    trial_id: int
    hyperparams: dict
    eps_hat: float
    eps: float
    seconds: float

    @property
    def delta(self) -> float:
        return self.eps - self.eps_hat


@dataclass
class TrialLedger:
    model: str
    scheme: str
    hpo: str
    rows: list[TrialRow]

    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.rows])

    def mean_delta(self) -> float:
        return float(self.deltas().mean())

    def std_delta(self) -> float:
        d = self.deltas()
        return float(d.std(ddof=1)) if len(d) > 1 else 0.0

    def mean_abs_delta(self) -> float:
        return float(np.abs(self.deltas()).mean())

    def std_abs_delta(self) -> float:
        d = np.abs(self.deltas())
        return float(d.std(ddof=1)) if len(d) > 1 else 0.0

    def delta_at_best(self) -> float:
        """Delta of the trial the tuner would pick (lowest eps_hat)."""
        best = min(self.rows, key=lambda r: r.eps_hat)
        return best.delta

    def mean_seconds(self) -> float:
        return float(np.mean([r.seconds for r in self.rows]))


def run_delta_eps_experiment(family: str, space: HPSpace, view: DatasetView,
                             train_rows, val_rows,
                             scheme_params: SchemeParams,
                             hpo_algo: str = "random", n_trials: int = 100,
                             seed: int = 0, model_seed: int = 0) -> TrialLedger:
    """One ledger row per trial; `seconds` is the CV-estimation time alone."""
    train_rows = np.asarray(train_rows, dtype=np.int64)
    val_rows = np.asarray(val_rows, dtype=np.int64)
    if train_rows.max() >= val_rows.min():
        raise WindowOutOfRange("validation rows must follow all train rows")
    base_plan = make_splits(len(train_rows), scheme_params)
    plan = SplitPlan(iterations=tuple(
        (train_rows[tr], train_rows[te]) for tr, te in base_plan.iterations))
    searcher = make_searcher(hpo_algo, space, seed=seed)
    rows = []
    for t in range(n_trials):
        point = searcher.ask()
        spec = ModelSpec(family=family, hyperparams=point, seed=model_seed)
        started = time.perf_counter()
        estimate = estimate_generalization_error(spec, view, plan)
        seconds = time.perf_counter() - started
        searcher.tell(point, estimate.eps_hat)
        fitted = fit(spec, view, train_rows)
        eps = _rmse(view.y.values[val_rows], predict(fitted, view, val_rows))
        rows.append(TrialRow(trial_id=t, hyperparams=point,
                             eps_hat=estimate.eps_hat, eps=eps,
                             seconds=seconds))
    return TrialLedger(model=family, scheme=scheme_params.label,
                       hpo=hpo_algo, rows=rows)


@dataclass(frozen=True)
class SizeSweepRow:
    size: int
    mean_abs_delta: float
    std_abs_delta: float


@dataclass
class SizeSweepResult:
    rows: list[SizeSweepRow]
    ledgers: dict[int, TrialLedger]


def dataset_size_sweep(family: str, space: HPSpace, view: DatasetView, sizes,
                       train_rows, val_rows, scheme_params: SchemeParams,
                       hpo_algo: str = "random", n_trials: int = 20,
                       seed: int = 0, model_seed: int = 0) -> SizeSweepResult:
    """Rerun the experiment on the most recent `size` train days per size."""
    train_rows = np.asarray(train_rows, dtype=np.int64)
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError(f"sizes must be strictly ascending, got {sizes}")
    if sizes and sizes[0] < 2:
        raise ValueError(f"sizes must be >= 2, got {sizes[0]}")
    rows, ledgers = [], {}
    for size in sizes:
        if size > len(train_rows):
            raise SizeExceedsWindow(
                f"size {size} exceeds the {len(train_rows)}-day train window")
        ledger = run_delta_eps_experiment(
            family, space, view, train_rows[-size:], val_rows, scheme_params,
            hpo_algo=hpo_algo, n_trials=n_trials, seed=seed,
            model_seed=model_seed)
        ledgers[size] = ledger
        rows.append(SizeSweepRow(size=size,
                                 mean_abs_delta=ledger.mean_abs_delta(),
                                 std_abs_delta=ledger.std_abs_delta()))
    return SizeSweepResult(rows=rows, ledgers=ledgers)


LEDGER_HEADER = ["trial_id", "scheme", "hpo", "model", "eps_hat_mw", "eps_mw",
                 "delta_mw", "seconds", "hyperparams_json"]


def write_ledger_csv(ledger: TrialLedger, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_HEADER)
        for r in ledger.rows:
            writer.writerow([r.trial_id, ledger.scheme, ledger.hpo,
                             ledger.model, repr(float(r.eps_hat)),
                             repr(float(r.eps)), repr(float(r.delta)),
                             repr(float(r.seconds)),
                             json.dumps(r.hyperparams, sort_keys=True)])


def read_ledger_csv(path) -> TrialLedger:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LEDGER_HEADER:
            raise SchemaMismatch(f"{path}: unexpected ledger header {header}")
        rows = []
        scheme = hpo = model = None
        for rec in reader:
            trial_id, scheme, hpo, model = int(rec[0]), rec[1], rec[2], rec[3]
            eps_hat, eps, delta = float(rec[4]), float(rec[5]), float(rec[6])
            if delta != eps - eps_hat:
                raise SchemaMismatch(
                    f"{path}: trial {trial_id} delta does not equal eps - eps_hat")
            rows.append(TrialRow(trial_id=trial_id,
                                 hyperparams=json.loads(rec[8]),
                                 eps_hat=eps_hat, eps=eps,
                                 seconds=float(rec[7])))
    if not rows:
        raise SchemaMismatch(f"{path}: ledger holds no trials")
    return TrialLedger(model=model, scheme=scheme, hpo=hpo, rows=rows)


def write_size_sweep_csv(result: SizeSweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size_days", "mean_abs_delta_mw", "std_abs_delta_mw"])
        for row in result.rows:
            writer.writerow([row.size, repr(float(row.mean_abs_delta)),
                             repr(float(row.std_abs_delta))])
