"""Dataset loading and the ingestion-to-view pipeline shared by subcommands."""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from ..errors import ConfigError, MissingArtifacts, SchemaMismatch
from ..features import (DatasetView, PCAModel, SplitSpec, build_average_view,
                        build_components_view, build_image_view,
                        make_chronological_split)
from ..gridstore import GridSpec, GridStack, Series, read_gsf, read_series_csv
from ..ingest import (FeatureColumn, assign_to_grid, compute_weights,
                      load_facilities, load_price, select_variables_mi,
                      temporal_features, weight_weather)


@dataclass(frozen=True)
class DatasetBundle:
    """Everything one dataset directory holds, loaded onto shared axes."""
    sector: str
    grid: GridSpec
    stacks: dict[str, GridStack]
    registry: object
    target: Series
    price: Series
    meta: dict

    @property
    def time(self):
        return self.target.time


def load_dataset(data_dir) -> DatasetBundle:
    d = Path(data_dir)
    manifest_path = d / "dataset.json"
    if not manifest_path.exists():
        raise MissingArtifacts(f"no dataset.json under {d}")
    meta = json.loads(manifest_path.read_text(encoding="utf-8"))
    g = meta["grid"]
    grid = GridSpec(g["lat0"], g["dlat"], g["nlat"], g["lon0"], g["dlon"],
                    g["nlon"])
    stacks = {}
    for var in meta["variables"]:
        stack = read_gsf(d / "weather" / f"{var}.gsf")
        if stack.spec != grid:
            raise SchemaMismatch(f"{var}.gsf grid differs from dataset.json")
        stacks[var] = stack
    target_raw = read_series_csv(d / meta["files"]["target"], "power_mw")
    target = Series(time=target_raw.time, name="power_mw", unit="MW",
                    values=target_raw.values)
    price = load_price(d / meta["files"]["price"])
    registry = load_facilities(d / meta["files"]["facilities"], meta["sector"])
    for name, series in (("target", target), ("price", price)):
        if series.time != target.time:
            raise SchemaMismatch(f"{name} series is on a different time axis")
    return DatasetBundle(sector=meta["sector"], grid=grid, stacks=stacks,
                         registry=registry, target=target, price=price,
                         meta=meta)


def split_from_config(config: dict) -> SplitSpec:
    s = config["split"]
    parse = lambda k: datetime.strptime(s[k], "%Y-%m-%d").date()
    return SplitSpec(train_end=parse("train_end"), val_end=parse("val_end"),
                     test_end=parse("test_end"))


@dataclass(frozen=True)
class PreparedData:
    """Weighted stacks, extras, and row windows for one experiment config."""
    bundle: DatasetBundle
    weighted: list[GridStack]
    extras: list[FeatureColumn]
    train_rows: np.ndarray
    val_rows: np.ndarray
    test_rows: np.ndarray
    selected: list[str]
    mi_scores: dict[str, float] | None


def prepare(config: dict, bundle: DatasetBundle) -> PreparedData:
    if config["sector"] != bundle.sector:
        raise ConfigError(f"config sector {config['sector']!r} but dataset "
                          f"holds {bundle.sector!r}")
    missing = [v for v in config["variables"] if v not in bundle.stacks]
    if missing:
        raise ConfigError(f"dataset lacks variables {missing}")
    time = bundle.time
    train, val, test = make_chronological_split(time, split_from_config(config))

    capacity = assign_to_grid(bundle.registry, bundle.grid, time)
    weights = compute_weights(capacity)
    weighted = {v: weight_weather(bundle.stacks[v], weights)
                for v in config["variables"]}

    selected = list(config["variables"])
    mi_scores = None
    if "mi_threshold" in config:
        # rank capacity-weighted averages against the target on train rows
        candidates = {
            v: weighted[v].values.mean(axis=(1, 2), dtype=np.float64)[train]
            for v in selected}
        keep, mi_scores = select_variables_mi(
            candidates, bundle.target.values[train],
            threshold=config["mi_threshold"], return_scores=True)
        if keep:
            selected = keep

    lat_ref = float(np.mean(bundle.grid.lats()))
    lon_ref = float(np.mean(bundle.grid.lons()))
    extras = temporal_features(time, lat_ref, lon_ref, bundle.sector)
    extras.append(FeatureColumn("price", bundle.price))
    return PreparedData(bundle=bundle,
                        weighted=[weighted[v] for v in selected],
                        extras=extras, train_rows=train, val_rows=val,
                        test_rows=test, selected=selected,
                        mi_scores=mi_scores)


def build_view(prepared: PreparedData, kind: str,
               n_components: int = 8) -> tuple[DatasetView, PCAModel | None]:
    if kind == "Average":
        view = build_average_view(prepared.weighted, prepared.extras,
                                  prepared.bundle.target)
        return view, None
    if kind == "Components":
        view, pca = build_components_view(prepared.weighted, prepared.extras,
                                          prepared.bundle.target,
                                          n_components=n_components)
        return view, pca
    if kind == "Image":
        view = build_image_view(prepared.weighted, prepared.extras,
                                prepared.bundle.target)
        return view, None
    raise ConfigError(f"unknown view kind {kind!r}")
