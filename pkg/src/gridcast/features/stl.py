"""Long-term trend removal for daily series via seasonal-trend decomposition.

Only the smooth trend component is subtracted; the seasonal cycle stays in
the signal for models to learn. Trends are stored so predictions made on
detrended data can be mapped back to the original scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from statsmodels.tsa.seasonal import STL

from ..errors import SeriesTooShort


def stl_detrend(v: np.ndarray, period: int = 365,
                trend_window: int = 731) -> tuple[np.ndarray, np.ndarray]:
    """Split a series into (trend, residual) with residual = v - trend."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {v.shape}")
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    if len(v) < 2 * period:
        raise SeriesTooShort(f"need >= {2 * period} samples for period {period}, got {len(v)}")
    if trend_window <= period:
        raise ValueError(f"trend_window {trend_window} must exceed period {period}")
    if trend_window % 2 == 0:
        trend_window += 1  # loess windows must be odd
    trend = STL(v, period=period, trend=trend_window).fit().trend
    trend = np.asarray(trend, dtype=np.float64)
    return trend, v - trend


def _extend_linearly(trend: np.ndarray, n_total: int, tail: int) -> np.ndarray:
    """Continue a fitted trend to n_total points along its recent slope."""
    n_fit = len(trend)
    tail = min(tail, n_fit)
    t = np.arange(n_fit - tail, n_fit, dtype=np.float64)
    slope, intercept = np.polyfit(t, trend[-tail:], 1)
    t_new = np.arange(n_fit, n_total, dtype=np.float64)
    return np.concatenate([trend, slope * t_new + intercept])


@dataclass(frozen=True)
class TrendModel:
    """Per-column trends aligned with a fixed daily window."""
    trend: np.ndarray                   # (n_days, n_cols) float64
    method: str
    period: int
    applied_columns: tuple[str, ...]

    def __post_init__(self):
        if self.method != "stl":
            raise ValueError(f"unknown trend method {self.method!r}")
        if self.trend.ndim != 2 or self.trend.shape[1] != len(self.applied_columns):
            raise ValueError("trend matrix does not match applied_columns")

    def detrend(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return X - self.trend[:, 0]
        return X - self.trend

    def retrend(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return X + self.trend[:, 0]
        return X + self.trend


def fit_trend(X: np.ndarray, columns: tuple[str, ...] | list[str],
              period: int = 365, trend_window: int = 731,
              fit_rows: int | None = None) -> TrendModel:
    """Fit one trend per column over the whole window.

    With `fit_rows` set, trends are estimated on the leading rows only and
    continued linearly over the rest, so later rows never leak into the fit.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != len(columns):
        raise ValueError(f"{X.shape[1]} columns vs {len(columns)} names")
    n = X.shape[0]
    n_fit = n if fit_rows is None else int(fit_rows)
    if not 0 < n_fit <= n:
        raise ValueError(f"fit_rows={fit_rows} outside (0, {n}]")
    trends = np.empty((n, X.shape[1]), dtype=np.float64)
    for j in range(X.shape[1]):
        trend, _ = stl_detrend(X[:n_fit, j], period=period, trend_window=trend_window)
        if n_fit < n:
            trend = _extend_linearly(trend, n, tail=period)
        trends[:, j] = trend
    return TrendModel(trend=trends, method="stl", period=period,
                      applied_columns=tuple(columns))
