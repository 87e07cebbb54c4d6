"""Hourly-to-daily aggregation for series and grid stacks."""
from __future__ import annotations

import numpy as np

from ..errors import MisalignedDay
from ..gridstore import DAILY, HOURLY, GridStack, Series, TimeAxis

# Accumulated variables are summed over the day; everything else is averaged.
ACCUMULATED_VARS = ("tp", "ssrd", "e", "ro")


def _check_axis(time: TimeAxis) -> None:
    if time.dt != HOURLY:
        raise MisalignedDay(f"expected an hourly axis, got dt={time.dt}")
    if time.t0.hour != 0 or time.t0.minute != 0 or time.t0.second != 0:
        raise MisalignedDay(f"axis must start at UTC midnight, got {time.t0.isoformat()}")
    if time.nt % 24 != 0:
        raise MisalignedDay(f"nt={time.nt} is not a whole number of days")


def _daily_axis(time: TimeAxis) -> TimeAxis:
    return TimeAxis(time.t0, DAILY, time.nt // 24)


def aggregate_to_daily(x: Series | GridStack, how: str = "mean") -> Series | GridStack:
    """Collapse whole UTC days: `mean` for states, `sum` for accumulations."""
    if how not in ("mean", "sum"):
        raise ValueError(f"how must be 'mean' or 'sum', got {how!r}")
    _check_axis(x.time)
    axis = _daily_axis(x.time)
    reducer = np.mean if how == "mean" else np.sum
    if isinstance(x, Series):
        v = reducer(x.values.reshape(axis.nt, 24), axis=1)
        return Series(time=axis, name=x.name, unit=x.unit, values=v)
    v = reducer(x.values.astype(np.float64).reshape(axis.nt, 24, x.spec.nlat, x.spec.nlon),
                axis=1)
    return GridStack(spec=x.spec, time=axis, var=x.var, unit=x.unit,
                     values=v.astype(np.float32))


def default_how(var: str) -> str:
    """Aggregation rule for a raw variable name (weighted names keep theirs)."""
    base = var[2:] if var.startswith("w_") else var
    return "sum" if base in ACCUMULATED_VARS else "mean"
