"""Hyperparameter search spaces with a unit-cube encoding.

Numeric dims map linearly (or log-linearly) onto [0, 1]; categorical dims
are one-hot relaxed so a Gaussian-process surrogate can treat every
dimension as continuous, then snapped back to the nearest choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

DIM_KINDS = ("int", "float", "log_float", "categorical")


@dataclass(frozen=True)
class Dim:
    name: str
    kind: str
    lo: float = 0.0
    hi: float = 1.0
    choices: tuple = ()

    def __post_init__(self):
        if self.kind not in DIM_KINDS:
            raise ConfigError(f"unknown dim kind {self.kind!r}")
        if self.kind == "categorical":
            if len(self.choices) < 1:
                raise ConfigError(f"dim {self.name!r}: categorical needs choices")
        else:
            if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
                raise ConfigError(f"dim {self.name!r}: bounds must be finite")
            if not self.lo < self.hi:
                raise ConfigError(f"dim {self.name!r}: lo must be < hi")
            if self.kind == "log_float" and self.lo <= 0:
                raise ConfigError(f"dim {self.name!r}: log_float needs lo > 0")

    @property
    def width(self) -> int:
        """Number of unit-cube coordinates this dim occupies."""
        return len(self.choices) if self.kind == "categorical" else 1


@dataclass(frozen=True)
class HPSpace:
    dims: tuple[Dim, ...] = field(default_factory=tuple)

    def __post_init__(self):
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate dim names in {names}")

    @property
    def encoded_dim(self) -> int:
        return sum(d.width for d in self.dims)

    def sample(self, rng: np.random.Generator) -> dict:
        """One uniform draw (log-uniform on log_float dims)."""
        point = {}
        for d in self.dims:
            if d.kind == "int":
                point[d.name] = int(rng.integers(int(d.lo), int(d.hi) + 1))
            elif d.kind == "float":
                point[d.name] = float(rng.uniform(d.lo, d.hi))
            elif d.kind == "log_float":
                point[d.name] = float(np.exp(rng.uniform(np.log(d.lo), np.log(d.hi))))
            else:
                point[d.name] = d.choices[int(rng.integers(len(d.choices)))]
        return point

    def encode(self, point: dict) -> np.ndarray:
        u = np.empty(self.encoded_dim, dtype=np.float64)
        k = 0
        for d in self.dims:
            v = point[d.name]
            if d.kind == "categorical":
                onehot = np.zeros(len(d.choices))
                onehot[d.choices.index(v)] = 1.0
                u[k:k + d.width] = onehot
            elif d.kind == "int" or d.kind == "float":
                u[k] = (float(v) - d.lo) / (d.hi - d.lo)
            else:
                u[k] = np.log(float(v) / d.lo) / np.log(d.hi / d.lo)
            k += d.width
        return u

    def decode(self, u: np.ndarray) -> dict:
        point = {}
        k = 0
        for d in self.dims:
            if d.kind == "categorical":
                point[d.name] = d.choices[int(np.argmax(u[k:k + d.width]))]
            else:
                t = float(np.clip(u[k], 0.0, 1.0))
                if d.kind == "int":
                    point[d.name] = int(round(d.lo + t * (d.hi - d.lo)))
                elif d.kind == "float":
                    point[d.name] = d.lo + t * (d.hi - d.lo)
                else:
                    point[d.name] = float(d.lo * (d.hi / d.lo) ** t)
            k += d.width
        return point


def default_space(family: str) -> HPSpace:
    """Search space over each model family's tunable hyperparameters."""
    if family == "linear":
        return HPSpace()
    if family in ("forest", "linear_forest"):
        dims = [Dim("n_trees", "int", 20, 150),
                Dim("max_depth", "int", 2, 12),
                Dim("min_leaf", "int", 2, 20),
                Dim("feature_frac", "categorical", choices=("sqrt", "all"))]
        if family == "linear_forest":
            dims.append(Dim("leaf_ridge", "log_float", 1e-5, 1e-1))
        return HPSpace(tuple(dims))
    if family in ("gbt", "linear_gbt"):
        dims = [Dim("n_rounds", "int", 20, 300),
                Dim("lr", "log_float", 0.01, 1.0),
                Dim("max_depth", "int", 1, 6),
                Dim("min_leaf", "int", 2, 20)]
        if family == "linear_gbt":
            dims.append(Dim("leaf_ridge", "log_float", 1e-5, 1e-1))
        return HPSpace(tuple(dims))
    if family == "gam":
        return HPSpace((Dim("n_knots", "int", 4, 30),
                        Dim("lam", "log_float", 1e-4, 1e6)))
    if family == "mlp":
        return HPSpace((
            Dim("hidden_sizes", "categorical",
                choices=((16,), (32,), (64,), (32, 16))),
            Dim("activation", "categorical", choices=("tanh", "relu")),
            Dim("lr", "log_float", 1e-3, 0.3),
            Dim("batch_size", "int", 16, 128),
            Dim("n_epochs", "int", 50, 300)))
    if family == "cnn":
        return HPSpace((
            Dim("conv_channels", "categorical",
                choices=((4, 8), (8, 16), (16, 32))),
            Dim("dense_size", "int", 8, 64),
            Dim("activation", "categorical", choices=("tanh", "relu")),
            Dim("lr", "log_float", 1e-3, 0.1),
            Dim("batch_size", "int", 8, 32),
            Dim("n_epochs", "int", 20, 80)))
    raise ConfigError(f"no default search space for family {family!r}")
