"""Calendar feature columns: time index, day-of-year cosine, sunshine hours."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnknownSector
from ..gridstore import SECTORS, Series, TimeAxis, read_series_csv

FEATURE_NAMES = ("time_index", "doy_cos", "sunshine_hours", "price")


@dataclass(frozen=True)
class FeatureColumn:
    """One auxiliary model input aligned with the target axis."""

    name: str
    series: Series

    def __post_init__(self):
        if self.name not in FEATURE_NAMES:
            raise ValueError(f"feature name must be one of {FEATURE_NAMES}")


def day_of_year(time: TimeAxis) -> np.ndarray:
    """Day of year as an integer in 1..365 (Dec 31 of leap years maps to 365)."""
    days = time.dates()
    years = days.astype("datetime64[Y]")
    doy = (days - years).astype(int) + 1
    return np.minimum(doy, 365)


def doy_cosine(time: TimeAxis) -> np.ndarray:
    """cos(2*pi*doy/365); equals 1.0 on the last day of the year."""
    return np.cos(2.0 * np.pi * day_of_year(time) / 365.0)


def day_length_hours(doy: np.ndarray, lat_deg: float) -> np.ndarray:
    """Astronomical day length from a solar-declination approximation.

    Declination: -23.44 deg * cos(2*pi*(doy+10)/365.25). Day length is
    (24/pi)*acos(-tan(lat)*tan(decl)), clamped to [0, 24] at polar extremes.
    """
    decl = np.deg2rad(-23.44) * np.cos(2.0 * np.pi * (doy + 10) / 365.25)
    lat = np.deg2rad(lat_deg)
    cos_h = np.clip(-np.tan(lat) * np.tan(decl), -1.0, 1.0)
    return 24.0 / np.pi * np.arccos(cos_h)


def temporal_features(time: TimeAxis, lat_ref: float, lon_ref: float,
                      sector: str) -> list[FeatureColumn]:
    """Time index plus a seasonality channel.

    Wind gets the day-of-year cosine; Solar gets the sunshine duration at the
    reference point instead, which tracks the photovoltaic production window.
    """
    if sector not in SECTORS:
        raise UnknownSector(f"sector must be one of {SECTORS}, got {sector!r}")
    index = Series(time=time, name="time_index", unit="",
                   values=np.arange(time.nt, dtype=np.float64))
    cols = [FeatureColumn("time_index", index)]
    if sector == "Solar":
        sunshine = day_length_hours(day_of_year(time), lat_ref)
        cols.append(FeatureColumn("sunshine_hours",
                                  Series(time=time, name="sunshine_hours",
                                         unit="h", values=sunshine)))
    else:
        cols.append(FeatureColumn("doy_cos",
                                  Series(time=time, name="doy_cos", unit="",
                                         values=doy_cosine(time))))
    return cols


def load_price(path) -> Series:
    """Day-ahead spot price series from `timestamp_utc,price_eur_mwh` CSV."""
    s = read_series_csv(path, "price_eur_mwh")
    return Series(time=s.time, name="price", unit="EUR/MWh", values=s.values)
