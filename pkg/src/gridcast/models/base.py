"""Uniform fit/predict front end over the model zoo, plus serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (ConfigError, SchemaMismatch, TooFewSamples,
                      ViewKindMismatch)
from ..features import DatasetView
from .forest import Forest, fit_forest
from .gam import GAMModel, fit_gam
from .gbt import BoostedTrees, fit_gbt
from .neural import CNNModel, MLPModel, fit_cnn, fit_mlp
from .tree import Tree

MODEL_FAMILIES = ("linear", "forest", "linear_forest", "gbt", "linear_gbt",
                  "gam", "mlp", "cnn")

# canonical hyperparameter tables; hpo builds its search spaces from these
HYPERPARAM_DEFAULTS: dict[str, dict] = {
    "linear": {},
    "forest": {"n_trees": 100, "max_depth": 10, "min_leaf": 5,
               "leaf_ridge": 1e-3, "feature_frac": "sqrt", "bootstrap": True},
    "linear_forest": {"n_trees": 100, "max_depth": 6, "min_leaf": 10,
                      "leaf_ridge": 1e-3, "feature_frac": "sqrt",
                      "bootstrap": True},
    "gbt": {"n_rounds": 100, "lr": 0.1, "max_depth": 3, "min_leaf": 5,
            "leaf_ridge": 1e-3},
    "linear_gbt": {"n_rounds": 100, "lr": 0.1, "max_depth": 2, "min_leaf": 10,
                   "leaf_ridge": 1e-3},
    "gam": {"n_knots": 10, "lam": 1.0},
    "mlp": {"hidden_sizes": (32,), "activation": "tanh", "lr": 0.05,
            "momentum": 0.9, "batch_size": 32, "n_epochs": 200, "patience": 20},
    "cnn": {"conv_channels": (8, 16), "dense_size": 32, "activation": "tanh",
            "lr": 0.01, "momentum": 0.9, "batch_size": 16, "n_epochs": 60,
            "patience": 10},
}


@dataclass(frozen=True)
class ModelSpec:
    """A model family plus hyperparameter overrides and a training seed."""
    family: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in MODEL_FAMILIES:
            raise ConfigError(f"unknown model family {self.family!r}")
        unknown = set(self.hyperparams) - set(HYPERPARAM_DEFAULTS[self.family])
        if unknown:
            raise ConfigError(
                f"unknown hyperparameters for {self.family}: {sorted(unknown)}")

    def resolved(self) -> dict:
        return {**HYPERPARAM_DEFAULTS[self.family], **self.hyperparams}


@dataclass
class FittedModel:
    spec: ModelSpec
    schema: dict          # view kind + feature names (+ image shape)
    model: object         # family-specific learned object
    diagnostics: dict


@dataclass(frozen=True)
class LinearModel:
    coef: np.ndarray
    intercept: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef + self.intercept


def _fit_linear(X: np.ndarray, y: np.ndarray) -> LinearModel:
    A = np.hstack([X, np.ones((len(X), 1))])
    beta = np.linalg.lstsq(A, y, rcond=None)[0]
    return LinearModel(coef=beta[:-1], intercept=float(beta[-1]))


def _schema_of(view: DatasetView) -> dict:
    schema = {"kind": view.kind, "feature_names": list(view.feature_names)}
    if view.kind == "Image":
        schema["image_shape"] = list(view.X_img.shape[1:])
        schema["n_scalars"] = view.X_scalar.shape[1]
    return schema


def fit(spec: ModelSpec, view: DatasetView, row_indices) -> FittedModel:
    """Train `spec` on the given view rows; deterministic for a fixed seed."""
    rows = np.asarray(row_indices, dtype=np.int64)
    if rows.size == 0:
        raise TooFewSamples("cannot fit on an empty row set")
    if spec.family == "cnn":
        if view.kind != "Image":
            raise ViewKindMismatch(f"cnn needs an Image view, got {view.kind}")
    elif view.kind == "Image":
        raise ViewKindMismatch(f"{spec.family} needs a tabular view, got Image")
    hp = spec.resolved()
    diagnostics: dict = {"n_train": int(rows.size)}
    y = view.y.values[rows]
    if spec.family == "cnn":
        model = fit_cnn(view.X_img[rows], view.X_scalar[rows], y,
                        seed=spec.seed, **hp)
        diagnostics["loss_curve"] = list(model.loss_curve)
    else:
        X = view.X_tab[rows]
        if spec.family == "linear":
            model = _fit_linear(X, y)
        elif spec.family in ("forest", "linear_forest"):
            leaf = "linear" if spec.family == "linear_forest" else "constant"
            model = fit_forest(X, y, leaf_kind=leaf, seed=spec.seed, **hp)
        elif spec.family in ("gbt", "linear_gbt"):
            leaf = "linear" if spec.family == "linear_gbt" else "constant"
            model = fit_gbt(X, y, leaf_kind=leaf, **hp)
            diagnostics["loss_curve"] = list(model.train_loss)
        elif spec.family == "gam":
            model = fit_gam(X, y, **hp)
        else:
            model = fit_mlp(X, y, seed=spec.seed, **hp)
            diagnostics["loss_curve"] = list(model.loss_curve)
    return FittedModel(spec=spec, schema=_schema_of(view), model=model,
                       diagnostics=diagnostics)


def predict(fitted: FittedModel, view: DatasetView, row_indices) -> np.ndarray:
    """Predictions for the given rows; the view must match the fit schema."""
    rows = np.asarray(row_indices, dtype=np.int64)
    if view.kind != fitted.schema["kind"]:
        raise SchemaMismatch(
            f"model was fit on a {fitted.schema['kind']} view, got {view.kind}")
    if list(view.feature_names) != fitted.schema["feature_names"]:
        raise SchemaMismatch("feature names differ from the fit schema")
    if view.kind == "Image":
        if list(view.X_img.shape[1:]) != fitted.schema["image_shape"]:
            raise SchemaMismatch(
                f"image shape {view.X_img.shape[1:]} differs from fit schema")
        out = fitted.model.predict(view.X_img[rows], view.X_scalar[rows])
    else:
        out = fitted.model.predict(view.X_tab[rows])
    if not np.isfinite(out).all():
        raise ValueError("model produced non-finite predictions")
    return out


# ---------------------------------------------------------------------------
# serialization: JSON structure + npz array sidecar
# ---------------------------------------------------------------------------

FORMAT_VERSION = 1


def _encode(obj, arrays: dict, path: str):
    if isinstance(obj, np.ndarray):
        arrays[path] = obj
        return {"__array__": path}
    if isinstance(obj, dict):
        return {"__dict__": {k: _encode(v, arrays, f"{path}/{k}") for k, v in obj.items()}}
    if isinstance(obj, (list, tuple)):
        kind = "__list__" if isinstance(obj, list) else "__tuple__"
        return {kind: [_encode(v, arrays, f"{path}/{i}") for i, v in enumerate(obj)]}
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__} at {path}")


def _decode(node, arrays):
    if isinstance(node, dict):
        if "__array__" in node:
            return arrays[node["__array__"]]
        if "__dict__" in node:
            return {k: _decode(v, arrays) for k, v in node["__dict__"].items()}
        if "__list__" in node:
            return [_decode(v, arrays) for v in node["__list__"]]
        if "__tuple__" in node:
            return tuple(_decode(v, arrays) for v in node["__tuple__"])
    return node


def _model_state(model) -> dict:
    if isinstance(model, LinearModel):
        return {"coef": model.coef, "intercept": model.intercept}
    if isinstance(model, Forest):
        return {"trees": [vars(t) for t in model.trees]}
    if isinstance(model, BoostedTrees):
        return {"base": model.base, "lr": model.lr,
                "trees": [vars(t) for t in model.trees],
                "train_loss": list(model.train_loss)}
    if isinstance(model, (GAMModel, MLPModel, CNNModel)):
        return dict(vars(model))
    raise TypeError(f"cannot serialize model type {type(model).__name__}")


def _restore_model(family: str, state: dict):
    if family == "linear":
        return LinearModel(coef=state["coef"], intercept=state["intercept"])
    if family in ("forest", "linear_forest"):
        return Forest(trees=tuple(Tree(**t) for t in state["trees"]))
    if family in ("gbt", "linear_gbt"):
        return BoostedTrees(base=state["base"], lr=state["lr"],
                            trees=tuple(Tree(**t) for t in state["trees"]),
                            train_loss=tuple(state["train_loss"]))
    if family == "gam":
        return GAMModel(**state)
    if family == "mlp":
        return MLPModel(**state)
    return CNNModel(**state)


def save_model(fitted: FittedModel, prefix: str | Path) -> None:
    """Write <prefix>.json (structure) and <prefix>.npz (arrays)."""
    prefix = Path(prefix)
    arrays: dict[str, np.ndarray] = {}
    doc = {
        "version": FORMAT_VERSION,
        "family": fitted.spec.family,
        "hyperparams": _encode(fitted.spec.hyperparams, arrays, "hp"),
        "seed": fitted.spec.seed,
        "schema": fitted.schema,
        "diagnostics": _encode(fitted.diagnostics, arrays, "diag"),
        "state": _encode(_model_state(fitted.model), arrays, "state"),
    }
    prefix.parent.mkdir(parents=True, exist_ok=True)
    with open(prefix.with_suffix(".json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    np.savez(prefix.with_suffix(".npz"), **arrays)


def load_model(prefix: str | Path) -> FittedModel:
    prefix = Path(prefix)
    with open(prefix.with_suffix(".json"), encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != FORMAT_VERSION:
        raise SchemaMismatch(f"unsupported model format version {doc.get('version')!r}")
    with np.load(prefix.with_suffix(".npz")) as npz:
        arrays = {k: npz[k] for k in npz.files}
    spec = ModelSpec(family=doc["family"],
                     hyperparams=_decode(doc["hyperparams"], arrays),
                     seed=doc["seed"])
    model = _restore_model(doc["family"], _decode(doc["state"], arrays))
    return FittedModel(spec=spec, schema=doc["schema"], model=model,
                       diagnostics=_decode(doc["diagnostics"], arrays))
