"""Permutation feature importance for tabular models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleRow, ViewKindMismatch
from ..features import DatasetView
from ..models import FittedModel
from .metrics import mae, rmse

_METRICS = {"rmse": rmse, "mae": mae}


@dataclass(frozen=True)
class ImportanceResult:
    feature_names: tuple[str, ...]
    mean: np.ndarray        # error increase per feature
    std: np.ndarray
    raw: np.ndarray         # (n_features, n_repeats) per-repeat increases
    baseline: float
    metric: str
    n_repeats: int

    def ranking(self) -> list[str]:
        order = np.argsort(-self.mean, kind="stable")
        return [self.feature_names[j] for j in order]


def permutation_importance(fitted: FittedModel, view: DatasetView, rows,
                           metric: str = "rmse", n_repeats: int = 10,
                           seed: int = 0) -> ImportanceResult:
    """Error increase when one feature column is shuffled across the rows."""
    if view.kind == "Image":
        raise ViewKindMismatch("permutation importance needs a tabular view")
    if metric not in _METRICS:
        raise ValueError(f"unknown metric {metric!r}; options: {sorted(_METRICS)}")
    if n_repeats < 1:
        raise ValueError(f"n_repeats must be >= 1, got {n_repeats}")
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size < 2:
        raise SingleRow("need at least 2 rows to permute")
    score = _METRICS[metric]
    X = view.X_tab[rows]
    y = view.y.values[rows]
    baseline = score(y, fitted.model.predict(X))
    rng = np.random.default_rng(seed)
    p = X.shape[1]
    increases = np.empty((p, n_repeats), dtype=np.float64)
    for j in range(p):
        for r in range(n_repeats):
            shuffled = X.copy()
            shuffled[:, j] = X[rng.permutation(len(X)), j]
            increases[j, r] = score(y, fitted.model.predict(shuffled)) - baseline
    return ImportanceResult(feature_names=tuple(view.feature_names),
                            mean=increases.mean(axis=1),
                            std=increases.std(axis=1), raw=increases,
                            baseline=float(baseline),
                            metric=metric, n_repeats=n_repeats)
