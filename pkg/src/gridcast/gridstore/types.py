"""Core spatiotemporal data model: grids, time axes, series, and registries.

All types are immutable after construction (frozen dataclasses over read-only
numpy arrays) and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone

import numpy as np

HOURLY = 3600
DAILY = 86400

SECTORS = ("Solar", "Wind")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridSpec:
    """Regular lat/lon grid anchored at its south-west corner.

    Cell (i, j) is centered at (lat0 + i*dlat, lon0 + j*dlon) with ascending
    latitude and longitude.
    """

    lat0: float
    dlat: float
    nlat: int
    lon0: float
    dlon: float
    nlon: int

    def __post_init__(self):
        if self.dlat <= 0 or self.dlon <= 0:
            raise ValueError("grid steps must be positive")
        if self.nlat < 1 or self.nlon < 1:
            raise ValueError("grid must hold at least one cell")

    @classmethod
    def from_bounds(cls, lat_min: float, lat_max: float,
                    lon_min: float, lon_max: float, step: float) -> "GridSpec":
        nlat = int(round((lat_max - lat_min) / step)) + 1
        nlon = int(round((lon_max - lon_min) / step)) + 1
        return cls(lat_min, step, nlat, lon_min, step, nlon)

    @property
    def ncells(self) -> int:
        return self.nlat * self.nlon

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return (self.lat0 + i * self.dlat, self.lon0 + j * self.dlon)

    def cell_of(self, lat: float, lon: float) -> tuple[int, int]:
        """Nearest cell index for a point; may fall outside [0, n) at edges."""
        i = int(round((lat - self.lat0) / self.dlat))
        j = int(round((lon - self.lon0) / self.dlon))
        return i, j

    def contains_cell(self, i: int, j: int) -> bool:
        return 0 <= i < self.nlat and 0 <= j < self.nlon

    def lats(self) -> np.ndarray:
        return self.lat0 + self.dlat * np.arange(self.nlat)

    def lons(self) -> np.ndarray:
        return self.lon0 + self.dlon * np.arange(self.nlon)


def default_grid(step: float = 0.25) -> GridSpec:
    """Default national domain: 42.5..51N x -4.55..7.95E at 0.25 degrees."""
    return GridSpec.from_bounds(42.5, 51.0, -4.55, 7.95, step)


@dataclass(frozen=True)
class TimeAxis:
    """Uniform UTC time axis. Only hourly and daily steps are supported."""

    t0: datetime
    dt: int
    nt: int

    def __post_init__(self):
        if self.dt not in (HOURLY, DAILY):
            raise ValueError(f"dt must be {HOURLY} (hourly) or {DAILY} (daily), got {self.dt}")
        if self.nt < 1:
            raise ValueError("nt must be >= 1")
        t0 = self.t0
        if t0.tzinfo is None:
            t0 = t0.replace(tzinfo=timezone.utc)
        else:
            t0 = t0.astimezone(timezone.utc)
        object.__setattr__(self, "t0", t0)

    def timestamp(self, k: int) -> datetime:
        return self.t0 + timedelta(seconds=self.dt * k)

    def timestamps(self) -> list[datetime]:
        return [self.timestamp(k) for k in range(self.nt)]

    def dates(self) -> np.ndarray:
        """Calendar dates as datetime64[D], one per step."""
        start = np.datetime64(self.t0.replace(tzinfo=None), "s")
        steps = start + np.arange(self.nt) * np.timedelta64(self.dt, "s")
        return steps.astype("datetime64[D]")

    def index_of(self, when: datetime) -> int:
        if when.tzinfo is None:
            when = when.replace(tzinfo=timezone.utc)
        off = (when - self.t0).total_seconds()
        k = off / self.dt
        ki = int(round(k))
        if abs(k - ki) > 1e-9 or not (0 <= ki < self.nt):
            raise ValueError(f"{when.isoformat()} is not on this axis")
        return ki

    @property
    def end(self) -> datetime:
        return self.timestamp(self.nt - 1)


@dataclass(frozen=True)
class GridStack:
    """One weather variable on a (time, lat, lon) grid, float32, NaN = missing."""

    spec: GridSpec
    time: TimeAxis
    var: str
    unit: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        shape = (self.time.nt, self.spec.nlat, self.spec.nlon)
        if v.shape != shape:
            raise ValueError(f"values shape {v.shape} != {shape}")
        object.__setattr__(self, "values", _readonly(v))

    def same_axes(self, other: "GridStack") -> bool:
        return self.spec == other.spec and self.time == other.time


@dataclass(frozen=True)
class Series:
    """Named scalar time series (float64, no NaN after ingestion validation)."""

    time: TimeAxis
    name: str
    unit: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.time.nt,):
            raise ValueError(f"values shape {v.shape} != ({self.time.nt},)")
        object.__setattr__(self, "values", _readonly(v))


@dataclass(frozen=True)
class FacilityRecord:
    """One power unit: location, sector, capacity, and activity window."""

    id: str
    sector: str
    lat: float
    lon: float
    capacity_mw: float
    start: date
    stop: date | None = None

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise ValueError(f"sector must be one of {SECTORS}, got {self.sector!r}")
        if not self.capacity_mw > 0:
            raise ValueError("capacity_mw must be > 0")
        if self.stop is not None and self.stop < self.start:
            raise ValueError("stop date precedes start date")

    def active_on(self, day: date) -> bool:
        if day < self.start:
            return False
        return self.stop is None or day <= self.stop


@dataclass(frozen=True)
class FacilityRegistry:
    """All facilities of one sector, plus ingestion bookkeeping."""

    sector: str
    records: tuple[FacilityRecord, ...]
    n_source_rows: int = 0
    n_dropped: int = 0
    n_off_sector: int = 0
    dropped_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise ValueError(f"sector must be one of {SECTORS}, got {self.sector!r}")
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("facility ids must be unique")
        for r in self.records:
            if r.sector != self.sector:
                raise ValueError("all records must share the registry sector")

    @property
    def drop_fraction(self) -> float:
        if self.n_source_rows == 0:
            return 0.0
        return self.n_dropped / self.n_source_rows

    def total_capacity_mw(self) -> float:
        return float(sum(r.capacity_mw for r in self.records))

    def __len__(self) -> int:
        return len(self.records)
