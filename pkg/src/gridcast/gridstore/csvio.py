"""CSV interchange: scalar series and facility registries.

Series CSV: header ``timestamp_utc,<name>``, ISO-8601 timestamps, UTF-8, LF.
Facility CSV: ``facility_id,sector,lat_deg,lon_deg,capacity_mw,start_date,stop_date``
(stop_date may be empty).
"""
from __future__ import annotations

import csv
import math
from datetime import datetime, timezone

import numpy as np

from ..errors import (DuplicateTimestamp, HeaderParse, IoFailure,
                      NonNumericValue, NonUniformTimestep)
from .types import DAILY, HOURLY, Series, TimeAxis


def _parse_timestamp(s: str) -> datetime:
    t = datetime.fromisoformat(s.replace("Z", "+00:00"))
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def read_series_csv(path, value_column: str) -> Series:
    """Read a uniformly spaced series; rejects gaps, duplicates, bad values."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != ["timestamp_utc", value_column]:
                raise HeaderParse(
                    f"{path}: expected header ['timestamp_utc', {value_column!r}], got {header}")
            rows = list(reader)
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    if len(rows) < 2:
        raise NonUniformTimestep(f"{path}: need >= 2 rows to infer the timestep")

    times: list[datetime] = []
    values = np.empty(len(rows))
    for k, row in enumerate(rows):
        if len(row) != 2:
            raise HeaderParse(f"{path}: row {k + 2} has {len(row)} fields, expected 2")
        try:
            t = _parse_timestamp(row[0])
        except ValueError as e:
            raise NonUniformTimestep(f"{path}: bad timestamp {row[0]!r}") from e
        try:
            v = float(row[1])
        except ValueError as e:
            raise NonNumericValue(f"{path}: row {k + 2}: {row[1]!r}") from e
        if not math.isfinite(v):
            raise NonNumericValue(f"{path}: row {k + 2}: non-finite value {row[1]!r}")
        times.append(t)
        values[k] = v

    dt = (times[1] - times[0]).total_seconds()
    if dt == 0:
        raise DuplicateTimestamp(f"{path}: repeated timestamp {times[0].isoformat()}")
    if dt not in (HOURLY, DAILY):
        raise NonUniformTimestep(f"{path}: timestep {dt:.0f}s is not hourly or daily")
    for k in range(1, len(times)):
        step = (times[k] - times[k - 1]).total_seconds()
        if step == 0:
            raise DuplicateTimestamp(f"{path}: repeated timestamp {times[k].isoformat()}")
        if step != dt:
            raise NonUniformTimestep(
                f"{path}: step {step:.0f}s at row {k + 2} != inferred {dt:.0f}s")

    axis = TimeAxis(times[0], int(dt), len(rows))
    return Series(time=axis, name=value_column, unit="", values=values)


def write_series_csv(series: Series, path) -> None:
    """Inverse of read_series_csv; LF line endings, deterministic formatting."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"timestamp_utc,{series.name}\n")
            for k in range(series.time.nt):
                t = series.time.timestamp(k).strftime("%Y-%m-%dT%H:%M:%SZ")
                f.write(f"{t},{float(series.values[k])!r}\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


FACILITY_HEADER = ["facility_id", "sector", "lat_deg", "lon_deg",
                   "capacity_mw", "start_date", "stop_date"]


def read_facility_rows(path) -> list[dict]:
    """Read raw facility rows (no validation beyond the header contract)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != FACILITY_HEADER:
                raise HeaderParse(f"{path}: expected header {FACILITY_HEADER}, got {header}")
            return [dict(zip(FACILITY_HEADER, row)) for row in reader]
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e


def write_facility_csv(rows: list[dict], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(FACILITY_HEADER) + "\n")
            for row in rows:
                f.write(",".join(str(row.get(k, "")) for k in FACILITY_HEADER) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
