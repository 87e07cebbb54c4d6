"""Bagged tree ensembles with per-split feature subsampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import Tree, grow_tree


def _candidate_count(p: int, feature_frac) -> int:
    if feature_frac == "all":
        return p
    if feature_frac == "sqrt":
        return max(1, round(math.sqrt(p)))
    frac = float(feature_frac)
    if not 0 < frac <= 1:
        raise ValueError(f"feature_frac must be in (0, 1], got {feature_frac!r}")
    return max(1, round(frac * p))


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            out += tree.predict(X)
        return out / len(self.trees)


def fit_forest(X: np.ndarray, y: np.ndarray, n_trees: int = 100,
               max_depth: int = 10, min_leaf: int = 5,
               leaf_kind: str = "constant", leaf_ridge: float = 1e-3,
               feature_frac="sqrt", bootstrap: bool = True,
               seed: int = 0) -> Forest:
    """Average of trees grown on bootstrap resamples, seeded per tree."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    n, p = X.shape
    n_candidates = _candidate_count(p, feature_frac)
    children = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(grow_tree(X[rows], y[rows], max_depth=max_depth,
                               min_leaf=min_leaf, leaf_kind=leaf_kind,
                               leaf_ridge=leaf_ridge,
                               n_candidates=n_candidates, rng=rng))
    return Forest(trees=tuple(trees))
