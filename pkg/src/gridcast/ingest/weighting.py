"""Capacity weighting of weather maps.

Weights are the installed capacity normalized over the whole space-time
domain, w[t,i,j] = P[t,i,j] / sum_{t,i,j} P, so the growth of installed
capacity over the years is visible to the models through the inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AllZeroCapacity, AxisMismatch, NaNUnderWeight
from ..gridstore import GridSpec, GridStack, TimeAxis
from .facilities import CapacityGrid


@dataclass(frozen=True)
class WeightGrid:
    """Spatiotemporally normalized capacity weights; sums to 1 over (t,i,j)."""

    spec: GridSpec
    time: TimeAxis
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        shape = (self.time.nt, self.spec.nlat, self.spec.nlon)
        if w.shape != shape:
            raise ValueError(f"weight shape {w.shape} != {shape}")
        if (w < 0).any():
            raise ValueError("weights must be >= 0")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


def compute_weights(cap: CapacityGrid) -> WeightGrid:
    """Normalize the capacity grid by its grand total."""
    total = cap.capacity_mw.sum()
    if total <= 0:
        raise AllZeroCapacity("capacity grid sums to zero")
    return WeightGrid(spec=cap.spec, time=cap.time, w=cap.capacity_mw / total)


def weighted_values(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Elementwise product in float64. NaN under zero weight is masked to 0;
    NaN under positive weight raises NaNUnderWeight."""
    x = np.asarray(values, dtype=np.float64)
    nan_mask = np.isnan(x)
    if nan_mask.any():
        if (nan_mask & (w > 0)).any():
            t, i, j = np.argwhere(nan_mask & (w > 0))[0]
            raise NaNUnderWeight(f"NaN weather at weighted cell (t={t}, i={i}, j={j})")
        x = np.where(nan_mask, 0.0, x)
    return x * w


def weight_weather(stack: GridStack, weights: WeightGrid) -> GridStack:
    """Multiply a weather stack by the capacity weights; renames var to w_<var>."""
    if stack.spec != weights.spec or stack.time != weights.time:
        raise AxisMismatch("weather stack and weight grid axes differ")
    product = weighted_values(stack.values, weights.w)
    return GridStack(spec=stack.spec, time=stack.time, var=f"w_{stack.var}",
                     unit=stack.unit, values=product.astype(np.float32))
