"""Gaussian-process surrogate on the unit cube with a Matern-5/2 kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IllConditioned

SQRT5 = np.sqrt(5.0)
LENGTH_GRID = tuple(np.geomspace(0.05, 2.0, 8))
NOISE_GRID = (1e-8, 1e-6, 1e-4, 1e-2, 1e-1)


def matern52(A: np.ndarray, B: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    d = (A[:, None, :] - B[None, :, :]) / lengthscales
    r = np.sqrt(np.maximum((d * d).sum(axis=-1), 0.0))
    return (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * np.exp(-SQRT5 * r)


def _chol_with_jitter(K: np.ndarray) -> tuple[np.ndarray, float]:
    jitter = 1e-10
    while jitter <= 1e-6:
        try:
            return np.linalg.cholesky(K + jitter * np.eye(len(K))), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise IllConditioned("kernel matrix stayed non-positive-definite at jitter 1e-6")


@dataclass
class GPSurrogate:
    """Fitted posterior; hyperparameters picked by log marginal likelihood."""
    X: np.ndarray              # (n, d) unit-cube points
    lengthscales: np.ndarray   # (d,)
    noise: float
    y_mean: float
    y_std: float
    _L: np.ndarray
    _alpha: np.ndarray

    def predict(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance on the raw score scale."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
        Ks = matern52(Xq, self.X, self.lengthscales)
        mean_std = Ks @ self._alpha
        v = np.linalg.solve(self._L, Ks.T)
        var_std = np.maximum(1.0 - np.einsum("ij,ij->j", v, v), 0.0)
        return (mean_std * self.y_std + self.y_mean, var_std * self.y_std ** 2)


def _log_marginal(y: np.ndarray, L: np.ndarray, alpha: np.ndarray) -> float:
    n = len(y)
    return float(-0.5 * y @ alpha - np.log(np.diag(L)).sum()
                 - 0.5 * n * np.log(2.0 * np.pi))


def gp_fit(points: np.ndarray, scores: np.ndarray,
           length_grid=LENGTH_GRID, noise_grid=NOISE_GRID) -> GPSurrogate:
    """Fit on >= 2 observations, selecting (lengthscale, noise) on a grid."""
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    y = np.asarray(scores, dtype=np.float64)
    if len(X) < 2 or len(X) != len(y):
        raise ValueError(f"need >= 2 matched observations, got {X.shape} / {y.shape}")
    y_mean = float(y.mean())
    y_std = float(max(y.std(), 1e-12))
    ys = (y - y_mean) / y_std
    n, d = X.shape
    best = None
    for ell in length_grid:
        lengthscales = np.full(d, float(ell))
        K = matern52(X, X, lengthscales)
        for noise in noise_grid:
            try:
                L, _ = _chol_with_jitter(K + noise * np.eye(n))
            except IllConditioned:
                continue
            alpha = np.linalg.solve(L.T, np.linalg.solve(L, ys))
            lml = _log_marginal(ys, L, alpha)
            if best is None or lml > best[0]:
                best = (lml, lengthscales, float(noise), L, alpha)
    if best is None:
        raise IllConditioned("no (lengthscale, noise) candidate factorized")
    _, lengthscales, noise, L, alpha = best
    return GPSurrogate(X=X, lengthscales=lengthscales, noise=noise,
                       y_mean=y_mean, y_std=y_std, _L=L, _alpha=alpha)
