"""Principal-component analysis with a deterministic sign convention."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PCAModel:
    """Truncated PCA basis fitted on a column-centered matrix.

    `components` rows are orthonormal loading vectors; the entry of largest
    magnitude in each row is positive so refits are bit-reproducible.
    """
    mean: np.ndarray               # (p,)
    components: np.ndarray         # (k, p)
    explained_variance: np.ndarray  # (k,)
    total_variance: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def explained_ratio(self) -> np.ndarray:
        if self.total_variance <= 0.0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / self.total_variance

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) @ self.components.T

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        return Z @ self.components + self.mean


def fit_pca(X: np.ndarray, n_components: int) -> PCAModel:
    """Fit a rank-`n_components` PCA via SVD of the centered matrix.

    Rank-deficient inputs are fine: trailing components get zero variance.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {X.shape}")
    n, p = X.shape
    if not 1 <= n_components <= min(n, p):
        raise ValueError(f"n_components={n_components} outside [1, {min(n, p)}]")
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    components = vt[:n_components].copy()
    # sign convention: largest-|loading| entry of each component is positive
    anchor = np.abs(components).argmax(axis=1)
    flip = components[np.arange(n_components), anchor] < 0
    components[flip] *= -1.0
    denom = max(n - 1, 1)
    variances = s ** 2 / denom
    return PCAModel(mean=mean, components=components,
                    explained_variance=variances[:n_components],
                    total_variance=float(variances.sum()))
