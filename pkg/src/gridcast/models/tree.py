"""Regression trees grown by greedy squared-error CART splits.

Leaves predict either the leaf mean (constant) or a ridge-regularized
linear fit on the leaf's rows, which lets the tree extrapolate along a
locally linear signal instead of flat-lining at the training range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewSamples

LEAF_KINDS = ("constant", "linear")


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; `feature == -1` marks a leaf."""
    feature: np.ndarray    # (n_nodes,) int64
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray       # (n_nodes,) int64
    right: np.ndarray      # (n_nodes,) int64
    coef: np.ndarray       # (n_nodes, p) float64, zero rows for constant leaves
    intercept: np.ndarray  # (n_nodes,) float64
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) inputs, got {X.shape}")
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            live = feat >= 0
            if not live.any():
                break
            col = X[np.arange(len(X)), np.maximum(feat, 0)]
            goes_left = col <= self.threshold[node]
            nxt = np.where(goes_left, self.left[node], self.right[node])
            node = np.where(live, nxt, node)
        return np.einsum("ij,ij->i", X, self.coef[node]) + self.intercept[node]


def _leaf_params(X: np.ndarray, y: np.ndarray, leaf_kind: str,
                 leaf_ridge: float) -> tuple[np.ndarray, float]:
    p = X.shape[1]
    if leaf_kind == "constant":
        return np.zeros(p), float(y.mean())
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    alpha = leaf_ridge * len(y)
    if alpha > 0:
        try:
            w = np.linalg.solve(Xc.T @ Xc + alpha * np.eye(p), Xc.T @ (y - ym))
        except np.linalg.LinAlgError:
            w = np.linalg.lstsq(Xc, y - ym, rcond=None)[0]
    else:
        w = np.linalg.lstsq(Xc, y - ym, rcond=None)[0]
    if not np.isfinite(w).all():
        return np.zeros(p), float(ym)
    return w, float(ym - xm @ w)


def _best_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray, min_leaf: int,
                feat_idx: np.ndarray) -> tuple[int, float] | None:
    """Exhaustive squared-error split search over the candidate features."""
    n = len(idx)
    Xn = X[np.ix_(idx, feat_idx)]
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    ys = y[idx][order]
    csum = np.cumsum(ys, axis=0)
    csum2 = np.cumsum(ys * ys, axis=0)
    total, total2 = csum[-1], csum2[-1]
    k = np.arange(1, n, dtype=np.float64)[:, None]   # left-side row counts
    left2, left1 = csum2[:-1], csum[:-1]
    sse = (left2 - left1 ** 2 / k) + \
        ((total2 - left2) - (total - left1) ** 2 / (n - k))
    valid = (xs[1:] > xs[:-1]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not valid.any():
        return None
    sse = np.where(valid, sse, np.inf)
    pos, col = np.unravel_index(np.argmin(sse), sse.shape)
    parent_sse = float(total2[col] - total[col] ** 2 / n)
    if not sse[pos, col] < parent_sse - 1e-12 * max(parent_sse, 1.0):
        return None
    threshold = 0.5 * (xs[pos, col] + xs[pos + 1, col])
    return int(feat_idx[col]), float(threshold)


class _Builder:
    def __init__(self, X, y, max_depth, min_leaf, leaf_kind, leaf_ridge,
                 n_candidates, rng):
        self.X, self.y = X, y
        self.max_depth, self.min_leaf = max_depth, min_leaf
        self.leaf_kind, self.leaf_ridge = leaf_kind, leaf_ridge
        self.n_candidates, self.rng = n_candidates, rng
        self.feature, self.threshold = [], []
        self.left, self.right = [], []
        self.coef, self.intercept = [], []

    def _emit(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.coef.append(np.zeros(self.X.shape[1]))
        self.intercept.append(0.0)
        return len(self.feature) - 1

    def _leaf(self, node: int, idx: np.ndarray) -> None:
        coef, intercept = _leaf_params(self.X[idx], self.y[idx],
                                       self.leaf_kind, self.leaf_ridge)
        self.coef[node] = coef
        self.intercept[node] = intercept

    def grow(self, idx: np.ndarray, depth: int) -> int:
        node = self._emit()
        p = self.X.shape[1]
        if depth >= self.max_depth or len(idx) < 2 * self.min_leaf:
            self._leaf(node, idx)
            return node
        if self.n_candidates < p:
            feat_idx = np.sort(self.rng.choice(p, self.n_candidates, replace=False))
        else:
            feat_idx = np.arange(p)
        split = _best_split(self.X, self.y, idx, self.min_leaf, feat_idx)
        if split is None:
            self._leaf(node, idx)
            return node
        feat, threshold = split
        goes_left = self.X[idx, feat] <= threshold
        self.feature[node] = feat
        self.threshold[node] = threshold
        self.left[node] = self.grow(idx[goes_left], depth + 1)
        self.right[node] = self.grow(idx[~goes_left], depth + 1)
        return node


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int = 6,
              min_leaf: int = 5, leaf_kind: str = "constant",
              leaf_ridge: float = 1e-3, n_candidates: int | None = None,
              rng: np.random.Generator | None = None) -> Tree:
    """Grow one CART tree; zero-variance or unsplittable nodes become leaves."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"bad training shapes {X.shape} / {y.shape}")
    if leaf_kind not in LEAF_KINDS:
        raise ValueError(f"leaf_kind must be one of {LEAF_KINDS}, got {leaf_kind!r}")
    if max_depth < 0 or min_leaf < 1:
        raise ValueError(f"bad tree size limits: depth {max_depth}, min_leaf {min_leaf}")
    if len(X) < 2 * min_leaf:
        raise TooFewSamples(f"{len(X)} rows < 2*min_leaf={2 * min_leaf}")
    p = X.shape[1]
    builder = _Builder(X, y, max_depth, min_leaf, leaf_kind, leaf_ridge,
                       p if n_candidates is None else max(1, n_candidates),
                       rng or np.random.default_rng(0))
    builder.grow(np.arange(len(X)), 0)
    coef = np.vstack(builder.coef) if p else np.zeros((len(builder.feature), 0))
    return Tree(feature=np.array(builder.feature, dtype=np.int64),
                threshold=np.array(builder.threshold, dtype=np.float64),
                left=np.array(builder.left, dtype=np.int64),
                right=np.array(builder.right, dtype=np.int64),
                coef=coef,
                intercept=np.array(builder.intercept, dtype=np.float64),
                n_features=p)
