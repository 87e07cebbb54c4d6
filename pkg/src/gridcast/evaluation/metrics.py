"""Forecast accuracy metrics over paired target/prediction vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConstantTarget, ZeroTarget


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError(f"need equal-length 1-d vectors, got {y.shape} / {yhat.shape}")
    if len(y) < 2:
        raise ValueError(f"need at least 2 samples, got {len(y)}")
    return y, yhat


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def mape(y, yhat, tolerate_zeros: bool = False) -> float:
    """Mean absolute percentage error; zero targets are fatal unless tolerated."""
    y, yhat = _pair(y, yhat)
    scale = np.abs(y).max()
    keep = np.abs(y) >= 1e-9 * scale if scale > 0 else np.zeros(len(y), dtype=bool)
    if not keep.all():
        if not tolerate_zeros:
            raise ZeroTarget(f"{int((~keep).sum())} target values are zero")
        if not keep.any():
            raise ZeroTarget("every target value is zero")
        y, yhat = y[keep], yhat[keep]
    return float(100.0 * np.mean(np.abs((y - yhat) / y)))


def rmse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def nrmse(y, yhat) -> float:
    """RMSE as a percentage of the target range."""
    y, yhat = _pair(y, yhat)
    span = y.max() - y.min()
    if span <= 0:
        raise ConstantTarget("target range is zero")
    return float(100.0 * np.sqrt(np.mean((y - yhat) ** 2)) / span)


def r2(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 0:
        raise ConstantTarget("target variance is zero")
    return float(1.0 - np.sum((y - yhat) ** 2) / ss_tot)


@dataclass(frozen=True)
class MetricSet:
    mae: float
    mape: float | None   # None when zeros were tolerated away entirely (never) or skipped
    rmse: float
    nrmse: float
    r2: float
    y_max: float
    y_min: float
    y_mean: float
    n_zero_excluded: int

    def as_dict(self) -> dict:
        return {"mae": self.mae, "mape": self.mape, "rmse": self.rmse,
                "nrmse": self.nrmse, "r2": self.r2}


def metrics(y, yhat, tolerate_zeros: bool = False) -> MetricSet:
    """All five metrics at once; see the per-metric functions for formulas."""
    y, yhat = _pair(y, yhat)
    n_excluded = int((np.abs(y) < 1e-9 * np.abs(y).max()).sum()) if tolerate_zeros else 0
    return MetricSet(mae=mae(y, yhat),
                     mape=mape(y, yhat, tolerate_zeros=tolerate_zeros),
                     rmse=rmse(y, yhat), nrmse=nrmse(y, yhat), r2=r2(y, yhat),
                     y_max=float(y.max()), y_min=float(y.min()),
                     y_mean=float(y.mean()), n_zero_excluded=n_excluded)
