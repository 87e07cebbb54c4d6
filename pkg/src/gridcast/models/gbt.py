"""Stagewise gradient boosting on squared loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import Tree, grow_tree


@dataclass(frozen=True)
class BoostedTrees:
    base: float
    lr: float
    trees: tuple[Tree, ...]
    train_loss: tuple[float, ...]   # MSE after each round

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.full(len(X), self.base, dtype=np.float64)
        for tree in self.trees:
            out += self.lr * tree.predict(X)
        return out


def fit_gbt(X: np.ndarray, y: np.ndarray, n_rounds: int = 100, lr: float = 0.1,
            max_depth: int = 3, min_leaf: int = 5, leaf_kind: str = "constant",
            leaf_ridge: float = 1e-3) -> BoostedTrees:
    """Boost trees on the running residual; training MSE never increases."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    if not 0 < lr <= 1:
        raise ValueError(f"lr must be in (0, 1], got {lr}")
    current = np.full(len(y), y.mean(), dtype=np.float64)
    trees = []
    losses = []
    for _ in range(n_rounds):
        tree = grow_tree(X, y - current, max_depth=max_depth, min_leaf=min_leaf,
                         leaf_kind=leaf_kind, leaf_ridge=leaf_ridge)
        current = current + lr * tree.predict(X)
        trees.append(tree)
        losses.append(float(np.mean((y - current) ** 2)))
    return BoostedTrees(base=float(y.mean()), lr=lr, trees=tuple(trees),
                        train_loss=tuple(losses))
