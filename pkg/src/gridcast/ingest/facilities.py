"""Facility registry loading and capacity-grid assignment."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from ..errors import NegativeCapacity, OutOfDomain, UnknownSector
from ..gridstore import (SECTORS, FacilityRecord, FacilityRegistry, GridSpec,
                         TimeAxis, read_facility_rows)


@dataclass(frozen=True)
class CapacityGrid:
    """Installed capacity (MW) per cell and timestep, float64."""

    spec: GridSpec
    time: TimeAxis
    capacity_mw: np.ndarray
    n_off_grid: int = 0

    def __post_init__(self):
        c = np.asarray(self.capacity_mw, dtype=np.float64)
        shape = (self.time.nt, self.spec.nlat, self.spec.nlon)
        if c.shape != shape:
            raise ValueError(f"capacity shape {c.shape} != {shape}")
        if (c < 0).any():
            raise ValueError("capacity entries must be >= 0")
        c.flags.writeable = False
        object.__setattr__(self, "capacity_mw", c)


def _parse_date(s: str) -> date:
    return datetime.strptime(s, "%Y-%m-%d").date()


def load_facilities(path, sector: str) -> FacilityRegistry:
    """Load one sector's facilities from CSV.

    Rows of other sectors are counted as off-sector and skipped. Rows of the
    requested sector missing a location or a capacity are dropped and counted;
    the registry reports the resulting drop fraction. A parseable capacity
    <= 0 is a hard error rather than a silent drop.
    """
    if sector not in SECTORS:
        raise UnknownSector(f"sector must be one of {SECTORS}, got {sector!r}")

    records: list[FacilityRecord] = []
    n_rows = 0
    n_off_sector = 0
    dropped: list[str] = []
    for row in read_facility_rows(path):
        if row["sector"] != sector:
            n_off_sector += 1
            continue
        n_rows += 1
        fid = row["facility_id"]
        cap_raw = row["capacity_mw"].strip()
        lat_raw, lon_raw = row["lat_deg"].strip(), row["lon_deg"].strip()
        if not cap_raw or not lat_raw or not lon_raw:
            dropped.append(fid)
            continue
        try:
            cap = float(cap_raw)
            lat = float(lat_raw)
            lon = float(lon_raw)
        except ValueError:
            dropped.append(fid)
            continue
        if cap <= 0:
            raise NegativeCapacity(f"facility {fid!r}: capacity_mw = {cap}")
        stop_raw = row.get("stop_date", "").strip()
        records.append(FacilityRecord(
            id=fid, sector=sector, lat=lat, lon=lon, capacity_mw=cap,
            start=_parse_date(row["start_date"]),
            stop=_parse_date(stop_raw) if stop_raw else None,
        ))

    return FacilityRegistry(sector=sector, records=tuple(records),
                            n_source_rows=n_rows, n_dropped=len(dropped),
                            n_off_sector=n_off_sector, dropped_ids=tuple(dropped))


def assign_to_grid(registry: FacilityRegistry, spec: GridSpec,
                   time: TimeAxis) -> CapacityGrid:
    """Accumulate each facility's capacity onto its nearest cell while active.

    Facilities whose nearest cell falls just outside the grid (within one
    cell of the border) are rejected and counted off-grid; anything farther
    raises OutOfDomain.
    """
    cap = np.zeros((time.nt, spec.nlat, spec.nlon))
    days = time.dates()  # datetime64[D] per step
    n_off_grid = 0
    for rec in registry.records:
        i, j = spec.cell_of(rec.lat, rec.lon)
        if not spec.contains_cell(i, j):
            if -1 <= i <= spec.nlat and -1 <= j <= spec.nlon:
                n_off_grid += 1
                continue
            raise OutOfDomain(rec.id, rec.lat, rec.lon)
        active = days >= np.datetime64(rec.start)
        if rec.stop is not None:
            active &= days <= np.datetime64(rec.stop)
        cap[active, i, j] += rec.capacity_mw
    return CapacityGrid(spec=spec, time=time, capacity_mw=cap, n_off_grid=n_off_grid)
