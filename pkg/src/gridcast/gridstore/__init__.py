"""Spatiotemporal data model and bit-exact file I/O."""

from .csvio import (FACILITY_HEADER, read_facility_rows, read_series_csv,
                    write_facility_csv, write_series_csv)
from .gsf import read_gsf, write_gsf
from .types import (DAILY, HOURLY, SECTORS, FacilityRecord, FacilityRegistry,
                    GridSpec, GridStack, Series, TimeAxis, default_grid)

__all__ = [
    "DAILY", "HOURLY", "SECTORS",
    "GridSpec", "TimeAxis", "GridStack", "Series",
    "FacilityRecord", "FacilityRegistry", "default_grid",
    "read_gsf", "write_gsf",
    "read_series_csv", "write_series_csv",
    "read_facility_rows", "write_facility_csv", "FACILITY_HEADER",
]
