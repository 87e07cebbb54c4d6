"""Synthetic desk-scale datasets: weather stacks, facilities, target, price.

The target is built by running the real ingestion pipeline (capacity
weighting + spatial averaging) over the generated weather, then applying a
known link function, so models see a recoverable ground truth and the
written dataset is exactly consistent with what ingestion reproduces.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter1d
from scipy.signal import lfilter

from ..errors import IoFailure
from ..features import spatial_average
from ..gridstore import (GridSpec, GridStack, Series, TimeAxis,
                         write_facility_csv, write_gsf, write_series_csv)
from ..ingest import assign_to_grid, compute_weights, load_facilities, weight_weather
from .config import VARIABLE_CATALOG, canonical_json, validate_synth

# plausible daily levels per field so synthetic values sit in a sane range
BASE_LEVELS = {"t2m": 283.0, "ssrd": 1.5e7, "u10": 4.0, "v10": 3.0,
               "u100": 6.0, "v100": 5.0, "i10fg": 9.0, "tp": 2e-3,
               "e": 1.5e-3, "ro": 1e-3}
QUAD_COEF = 0.15    # curvature of the quadratic-saturating link


@dataclass(frozen=True)
class SynthSpec:
    sector: str
    n_days: int
    t0: datetime
    grid: GridSpec
    variables: tuple[str, ...]
    n_facilities: int
    growth: tuple[tuple[float, float], ...]   # (day, installed MW) breakpoints
    seasonal_amplitudes: tuple[float, ...]
    noise_sigma: float
    link: str
    seed: int

    @classmethod
    def from_config(cls, config: dict) -> "SynthSpec":
        validate_synth(config)
        g = config["grid"]
        t0 = datetime.strptime(config.get("t0", "2015-01-01"),
                               "%Y-%m-%d").replace(tzinfo=timezone.utc)
        return cls(
            sector=config["sector"], n_days=config["n_days"], t0=t0,
            grid=GridSpec(g["lat0"], g["dlat"], g["nlat"], g["lon0"],
                          g["dlon"], g["nlon"]),
            variables=tuple(config["variables"]),
            n_facilities=config.get("n_facilities", 25),
            growth=tuple((float(d), float(mw)) for d, mw in config["growth"]),
            seasonal_amplitudes=tuple(config["seasonal_amplitudes"]),
            noise_sigma=float(config["noise_sigma"]), link=config["link"],
            seed=config["seed"])


def _capacity_curve(spec: SynthSpec) -> np.ndarray:
    days = np.array([b[0] for b in spec.growth])
    mws = np.array([b[1] for b in spec.growth])
    return np.interp(np.arange(spec.n_days), days, mws)


def _facility_rows(spec: SynthSpec, rng: np.random.Generator) -> list[dict]:
    curve = _capacity_curve(spec)
    cap_each = float(curve.max()) / spec.n_facilities
    rows = []
    for k in range(spec.n_facilities):
        open_day = int(np.argmax(curve >= (k + 0.5) * cap_each))
        i = int(rng.integers(spec.grid.nlat))
        j = int(rng.integers(spec.grid.nlon))
        lat, lon = spec.grid.cell_center(i, j)
        lat += float(rng.uniform(-0.3, 0.3)) * spec.grid.dlat
        lon += float(rng.uniform(-0.3, 0.3)) * spec.grid.dlon
        start = (spec.t0 + timedelta(days=open_day)).date().isoformat()
        rows.append({"facility_id": f"SYN{k:04d}", "sector": spec.sector,
                     "lat_deg": repr(lat), "lon_deg": repr(lon),
                     "capacity_mw": repr(cap_each), "start_date": start,
                     "stop_date": ""})
    return rows


def _weather_stack(spec: SynthSpec, var: str, amp: float, time: TimeAxis,
                   rng: np.random.Generator) -> GridStack:
    n, nlat, nlon = spec.n_days, spec.grid.nlat, spec.grid.nlon
    doy = np.arange(n) % 365
    phase = float(rng.uniform(0.0, 365.0))
    season = np.cos(2.0 * np.pi * (doy - phase) / 365.25)
    smooth_sigma = max(1.0, min(nlat, nlon) / 6.0)
    mode = gaussian_filter(rng.standard_normal((nlat, nlon)), smooth_sigma)
    mode /= max(float(mode.std()), 1e-12)
    white = gaussian_filter(rng.standard_normal((n, nlat, nlon)),
                            (0.0, smooth_sigma, smooth_sigma))
    white /= max(float(white.std()), 1e-12)
    rho = 0.7
    ar = lfilter([np.sqrt(1 - rho ** 2)], [1.0, -rho], white, axis=0)
    # high-pass the noise so it carries no month-scale power; a flat growth
    # curve then yields a trend-free target (growth enters via the weights),
    # while day-scale autocorrelation is preserved
    ar = ar - uniform_filter1d(ar, size=min(n | 1, 31), axis=0,
                               mode="nearest")
    field = (BASE_LEVELS.get(var, 1.0)
             + amp * season[:, None, None] * (1.0 + 0.5 * mode)
             + 0.07 * amp * ar)
    return GridStack(spec=spec.grid, time=time, var=var,
                     unit=VARIABLE_CATALOG[var][0],
                     values=field.astype(np.float32))


def _average_columns(spec: SynthSpec, time: TimeAxis, facilities_csv: Path,
                     stacks: list[GridStack]) -> np.ndarray:
    registry = load_facilities(facilities_csv, spec.sector)
    capacity = assign_to_grid(registry, spec.grid, time)
    weights = compute_weights(capacity)
    return spatial_average([weight_weather(s, weights) for s in stacks])


def synth_generate(config: dict, out_dir) -> dict:
    """Write the dataset directory; returns the dataset manifest dict."""
    spec = SynthSpec.from_config(config)
    out = Path(out_dir)
    try:
        (out / "weather").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    fac_rng, weather_ss, link_rng, noise_rng, price_rng = [
        np.random.default_rng(s)
        for s in np.random.SeedSequence(spec.seed).spawn(5)]
    time = TimeAxis(spec.t0, 86400, spec.n_days)

    write_facility_csv(_facility_rows(spec, fac_rng), out / "facilities.csv")
    stacks = []
    for var, amp in zip(spec.variables, spec.seasonal_amplitudes):
        stack = _weather_stack(spec, var, amp, time,
                               np.random.default_rng(weather_ss.spawn(1)[0]))
        write_gsf(stack, out / "weather" / f"{var}.gsf")
        stacks.append(stack)

    avg = _average_columns(spec, time, out / "facilities.csv", stacks)
    mu = avg.mean(axis=0)
    sd = np.maximum(avg.std(axis=0), 1e-12)
    coefs = link_rng.uniform(0.5, 1.5, size=len(spec.variables))
    z = (avg - mu) / sd @ coefs
    quad = QUAD_COEF if spec.link == "quadratic_saturating" else 0.0
    core = z - quad * z ** 2
    y_scale = 500.0 / max(float(core.std()), 1e-9)
    y_offset = 100.0 - y_scale * float(core.min())
    y = y_offset + y_scale * core + noise_rng.normal(0.0, spec.noise_sigma,
                                                     spec.n_days)
    write_series_csv(Series(time=time, name="power_mw", unit="MW", values=y),
                     out / "target.csv")

    z_n = z / max(float(z.std()), 1e-12)
    doy = np.arange(spec.n_days) % 365
    price = (50.0 + 10.0 * np.cos(2.0 * np.pi * (doy - 15) / 365.25)
             - 8.0 * z_n + 3.0 * price_rng.standard_normal(spec.n_days))
    write_series_csv(Series(time=time, name="price_eur_mwh", unit="EUR/MWh",
                            values=price), out / "price.csv")

    link = {"link": spec.link, "variables": list(spec.variables),
            "column_means": [float(m) for m in mu],
            "column_stds": [float(s) for s in sd],
            "coefs": [float(c) for c in coefs], "quad_coef": quad,
            "y_offset": y_offset, "y_scale": y_scale,
            "noise_sigma": spec.noise_sigma}
    (out / "link.json").write_text(canonical_json(link) + "\n",
                                   encoding="utf-8")

    manifest = {
        "sector": spec.sector,
        "t0": spec.t0.date().isoformat(),
        "n_days": spec.n_days,
        "grid": {"lat0": spec.grid.lat0, "dlat": spec.grid.dlat,
                 "nlat": spec.grid.nlat, "lon0": spec.grid.lon0,
                 "dlon": spec.grid.dlon, "nlon": spec.grid.nlon},
        "variables": list(spec.variables),
        "files": {"facilities": "facilities.csv", "target": "target.csv",
                  "price": "price.csv", "link": "link.json",
                  "weather": [f"weather/{v}.gsf" for v in spec.variables]},
    }
    (out / "dataset.json").write_text(canonical_json(manifest) + "\n",
                                      encoding="utf-8")
    return manifest


def true_expectation(link: dict, avg_columns: np.ndarray) -> np.ndarray:
    """Noise-free target the link stored in link.json implies."""
    mu = np.array(link["column_means"])
    sd = np.array(link["column_stds"])
    z = (avg_columns - mu) / sd @ np.array(link["coefs"])
    core = z - link["quad_coef"] * z ** 2
    return link["y_offset"] + link["y_scale"] * core
