"""Model-ready dataset views over weighted daily weather stacks.

Three layouts of the same data, in increasing spatial fidelity:

- Average: one column per weather variable, spatially averaged.
- Components: principal-component scores of the flattened maps.
- Image: raw per-cell maps as channels plus a scalar side-channel.

Temporal features and price enter Average/Components as extra columns and
the Image view through its scalar side-channel.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from ..errors import AxisMismatch, IoFailure, SchemaMismatch
from ..gridstore import (GridSpec, GridStack, Series, TimeAxis,
                         read_gsf, read_series_csv, write_gsf,
                         write_series_csv)
from ..ingest import FeatureColumn
from .pca import PCAModel, fit_pca
from .splits import SplitSpec
from .stl import TrendModel

VIEW_KINDS = ("Average", "Components", "Image")


@dataclass(frozen=True)
class DatasetView:
    """One day per row; tabular or image-shaped inputs plus the target."""
    kind: str
    y: Series
    feature_names: tuple[str, ...]
    X_tab: np.ndarray | None = None      # (n_days, p)
    X_img: np.ndarray | None = None      # (n_days, channels, nlat, nlon)
    X_scalar: np.ndarray | None = None   # (n_days, s)
    spec: GridSpec | None = None

    def __post_init__(self):
        if self.kind not in VIEW_KINDS:
            raise ValueError(f"unknown view kind {self.kind!r}")
        n = self.y.time.nt
        if self.kind in ("Average", "Components"):
            if self.X_tab is None or self.X_img is not None:
                raise ValueError(f"{self.kind} view needs X_tab only")
            if self.X_tab.ndim != 2 or self.X_tab.shape[0] != n:
                raise ValueError(f"X_tab shape {self.X_tab.shape} vs {n} days")
            if self.X_tab.shape[1] != len(self.feature_names):
                raise ValueError("feature_names do not match X_tab columns")
        else:
            if self.X_img is None or self.X_scalar is None or self.X_tab is not None:
                raise ValueError("Image view needs X_img and X_scalar")
            if self.X_img.ndim != 4 or self.X_img.shape[0] != n:
                raise ValueError(f"X_img shape {self.X_img.shape} vs {n} days")
            if self.X_scalar.ndim != 2 or self.X_scalar.shape[0] != n:
                raise ValueError(f"X_scalar shape {self.X_scalar.shape} vs {n} days")
            if self.spec is None:
                raise ValueError("Image view needs a grid spec")
            if self.X_img.shape[2:] != (self.spec.nlat, self.spec.nlon):
                raise ValueError("X_img cells do not match the grid spec")
            if self.X_img.shape[1] + self.X_scalar.shape[1] != len(self.feature_names):
                raise ValueError("feature_names do not match channels + scalars")
        for part in (self.X_tab, self.X_img, self.X_scalar, self.y.values):
            if part is not None and np.isnan(part).any():
                raise ValueError("view contains NaN")

    @property
    def n_days(self) -> int:
        return self.y.time.nt

    @property
    def n_channels(self) -> int:
        return 0 if self.X_img is None else self.X_img.shape[1]


def _check_stacks(weighted: list[GridStack]) -> TimeAxis:
    if not weighted:
        raise ValueError("need at least one weather stack")
    first = weighted[0]
    for s in weighted[1:]:
        if not first.same_axes(s):
            raise AxisMismatch(f"stack {s.var!r} axes differ from {first.var!r}")
    return first.time


def _check_extras(extras: list[FeatureColumn], time: TimeAxis) -> None:
    for col in extras:
        if col.series.time != time:
            raise AxisMismatch(f"extra column {col.name!r} is on a different axis")


def _extras_matrix(extras: list[FeatureColumn], n: int) -> np.ndarray:
    if not extras:
        return np.zeros((n, 0), dtype=np.float64)
    return np.stack([col.series.values for col in extras], axis=1)


def spatial_average(weighted: list[GridStack]) -> np.ndarray:
    """Per-day mean over all grid cells, one column per input stack."""
    _check_stacks(weighted)
    return np.stack(
        [s.values.mean(axis=(1, 2), dtype=np.float64) for s in weighted], axis=1)


def build_average_view(weighted: list[GridStack], extras: list[FeatureColumn],
                       y: Series) -> DatasetView:
    time = _check_stacks(weighted)
    if y.time != time:
        raise AxisMismatch("target series is on a different axis")
    _check_extras(extras, time)
    X = np.hstack([spatial_average(weighted), _extras_matrix(extras, time.nt)])
    names = tuple(s.var for s in weighted) + tuple(c.name for c in extras)
    return DatasetView(kind="Average", y=y, feature_names=names, X_tab=X)


def build_components_view(weighted: list[GridStack], extras: list[FeatureColumn],
                          y: Series, n_components: int
                          ) -> tuple[DatasetView, PCAModel]:
    """PCA scores of the concatenated flattened maps, plus extra columns."""
    time = _check_stacks(weighted)
    if y.time != time:
        raise AxisMismatch("target series is on a different axis")
    _check_extras(extras, time)
    flat = np.hstack([s.values.reshape(time.nt, -1).astype(np.float64)
                      for s in weighted])
    pca = fit_pca(flat, n_components)
    scores = pca.transform(flat)
    X = np.hstack([scores, _extras_matrix(extras, time.nt)])
    names = tuple(f"pc{k + 1}" for k in range(n_components)) + \
        tuple(c.name for c in extras)
    return DatasetView(kind="Components", y=y, feature_names=names, X_tab=X), pca


def build_image_view(weighted: list[GridStack], extras: list[FeatureColumn],
                     y: Series) -> DatasetView:
    """Channel-stacked maps; price and temporal features ride as scalars."""
    time = _check_stacks(weighted)
    if y.time != time:
        raise AxisMismatch("target series is on a different axis")
    _check_extras(extras, time)
    X_img = np.stack([s.values for s in weighted], axis=1)
    names = tuple(s.var for s in weighted) + tuple(c.name for c in extras)
    return DatasetView(kind="Image", y=y, feature_names=names, X_img=X_img,
                       X_scalar=_extras_matrix(extras, time.nt),
                       spec=weighted[0].spec)


def _write_matrix(path: Path, names: tuple[str, ...], X: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_matrix(path: Path, names: tuple[str, ...]) -> np.ndarray:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",") != list(names):
        raise SchemaMismatch(f"{path.name}: header does not match manifest columns")
    return np.array([[float(v) for v in line.split(",")] for line in lines[1:]],
                    dtype=np.float64).reshape(len(lines) - 1, len(names))


def save_view(view: DatasetView, dirpath: str | Path,
              split: SplitSpec | None = None,
              trend: TrendModel | None = None) -> None:
    """Write a view directory: target CSV, inputs as CSV/GSF, manifest JSON."""
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    write_series_csv(view.y, d / "y.csv")
    manifest: dict = {
        "kind": view.kind,
        "feature_names": list(view.feature_names),
        "y_name": view.y.name,
        "y_unit": view.y.unit,
    }
    if view.kind in ("Average", "Components"):
        _write_matrix(d / "X_tab.csv", view.feature_names, view.X_tab)
    else:
        channels = view.feature_names[:view.n_channels]
        scalars = view.feature_names[view.n_channels:]
        manifest["channel_names"] = list(channels)
        manifest["scalar_names"] = list(scalars)
        for k, name in enumerate(channels):
            stack = GridStack(spec=view.spec, time=view.y.time, var=name,
                              unit="", values=view.X_img[:, k])
            write_gsf(stack, d / f"img_{name}.gsf")
        if scalars:
            _write_matrix(d / "X_scalar.csv", tuple(scalars), view.X_scalar)
    if split is not None:
        manifest["split"] = {"train_end": split.train_end.isoformat(),
                             "val_end": split.val_end.isoformat(),
                             "test_end": split.test_end.isoformat()}
    if trend is not None:
        manifest["trend"] = {"method": trend.method, "period": trend.period,
                             "applied_columns": list(trend.applied_columns)}
        _write_matrix(d / "trend.csv", trend.applied_columns, trend.trend)
    with open(d / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_view(dirpath: str | Path
              ) -> tuple[DatasetView, SplitSpec | None, TrendModel | None]:
    """Rebuild a view (and any split spec / trend model) from a directory."""
    d = Path(dirpath)
    try:
        manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise IoFailure(f"no manifest in {d}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"manifest is not valid JSON: {exc}") from exc
    kind = manifest.get("kind")
    if kind not in VIEW_KINDS:
        raise SchemaMismatch(f"manifest kind {kind!r} is not a view kind")
    names = tuple(manifest["feature_names"])
    y = read_series_csv(d / "y.csv", manifest["y_name"])
    y = Series(time=y.time, name=y.name, unit=manifest.get("y_unit", ""),
               values=y.values)
    if kind in ("Average", "Components"):
        X = _read_matrix(d / "X_tab.csv", names)
        view = DatasetView(kind=kind, y=y, feature_names=names, X_tab=X)
    else:
        channels = tuple(manifest["channel_names"])
        scalars = tuple(manifest["scalar_names"])
        stacks = [read_gsf(d / f"img_{name}.gsf") for name in channels]
        X_img = np.stack([s.values for s in stacks], axis=1)
        if scalars:
            X_scalar = _read_matrix(d / "X_scalar.csv", scalars)
        else:
            X_scalar = np.zeros((y.time.nt, 0), dtype=np.float64)
        view = DatasetView(kind=kind, y=y, feature_names=channels + scalars,
                           X_img=X_img, X_scalar=X_scalar, spec=stacks[0].spec)
    split = None
    if "split" in manifest:
        s = manifest["split"]
        split = SplitSpec(train_end=date.fromisoformat(s["train_end"]),
                          val_end=date.fromisoformat(s["val_end"]),
                          test_end=date.fromisoformat(s["test_end"]))
    trend = None
    if "trend" in manifest:
        t = manifest["trend"]
        cols = tuple(t["applied_columns"])
        trend = TrendModel(trend=_read_matrix(d / "trend.csv", cols),
                           method=t["method"], period=int(t["period"]),
                           applied_columns=cols)
    return view, split, trend
