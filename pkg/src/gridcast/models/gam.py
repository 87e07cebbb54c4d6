"""Additive spline regression: per-feature cubic smooths plus an intercept.

Each feature gets a clamped cubic B-spline basis on evenly spaced knots;
roughness is controlled by a second-difference penalty on the spline
coefficients, solved in one penalized least-squares system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularSystem

DEGREE = 3


def make_knots(lo: float, hi: float, n_basis: int) -> np.ndarray:
    """Clamped knot vector giving `n_basis` cubic basis functions on [lo, hi]."""
    if n_basis < DEGREE + 1:
        raise ValueError(f"need at least {DEGREE + 1} basis functions, got {n_basis}")
    if not hi > lo:
        # constant feature: widen artificially so the basis stays well defined
        lo, hi = lo - 0.5, hi + 0.5
    interior = np.linspace(lo, hi, n_basis - DEGREE + 1)[1:-1]
    return np.concatenate([np.full(DEGREE + 1, lo), interior,
                           np.full(DEGREE + 1, hi)])


def bspline_basis(x: np.ndarray, knots: np.ndarray) -> np.ndarray:
    """Cox-de Boor evaluation; rows sum to 1 for x inside the knot range."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(knots, dtype=np.float64)
    m = len(t) - 1
    B = np.zeros((x.size, m))
    for j in range(m):
        if t[j] < t[j + 1]:
            B[:, j] = (x >= t[j]) & (x < t[j + 1])
    spans = np.nonzero(np.diff(t) > 0)[0]
    B[x == t[-1], spans[-1]] = 1.0
    for d in range(1, DEGREE + 1):
        nxt = np.zeros((x.size, m - d))
        for j in range(m - d):
            den = t[j + d] - t[j]
            if den > 0:
                nxt[:, j] += (x - t[j]) / den * B[:, j]
            den = t[j + d + 1] - t[j + 1]
            if den > 0:
                nxt[:, j] += (t[j + d + 1] - x) / den * B[:, j + 1]
        B = nxt
    return B


@dataclass(frozen=True)
class GAMModel:
    knots: tuple[np.ndarray, ...]        # one knot vector per feature
    basis_means: tuple[np.ndarray, ...]  # training column means per block
    coefs: tuple[np.ndarray, ...]        # spline coefficients per feature
    intercept: float
    x_lo: np.ndarray
    x_hi: np.ndarray
    lam: float

    @property
    def n_features(self) -> int:
        return len(self.knots)

    def smooth(self, j: int, x: np.ndarray) -> np.ndarray:
        """The j-th univariate smooth evaluated at (clamped) x."""
        x = np.clip(np.asarray(x, dtype=np.float64), self.x_lo[j], self.x_hi[j])
        return (bspline_basis(x, self.knots[j]) - self.basis_means[j]) @ self.coefs[j]

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) inputs, got {X.shape}")
        out = np.full(len(X), self.intercept, dtype=np.float64)
        for j in range(self.n_features):
            out += self.smooth(j, X[:, j])
        return out


def fit_gam(X: np.ndarray, y: np.ndarray, n_knots: int = 10,
            lam: float = 1.0) -> GAMModel:
    """Penalized least squares over centered per-feature spline blocks."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"bad training shapes {X.shape} / {y.shape}")
    if n_knots < DEGREE + 1:
        raise ValueError(f"n_knots must be >= {DEGREE + 1}, got {n_knots}")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    n, p = X.shape
    x_lo, x_hi = X.min(axis=0), X.max(axis=0)
    knots = [make_knots(x_lo[j], x_hi[j], n_knots) for j in range(p)]
    blocks, means = [], []
    for j in range(p):
        B = bspline_basis(X[:, j], knots[j])
        means.append(B.mean(axis=0))
        blocks.append(B - means[-1])
    A = np.hstack([np.ones((n, 1))] + blocks)
    d2 = np.diff(np.eye(n_knots), n=2, axis=0)
    penalty = np.zeros((A.shape[1], A.shape[1]))
    for j in range(p):
        lo = 1 + j * n_knots
        penalty[lo:lo + n_knots, lo:lo + n_knots] = d2.T @ d2
    gram = A.T @ A + lam * penalty
    # centered partition-of-unity blocks leave one flat direction per block;
    # a small ridge (intercept excluded) pins it down
    ridge = 1e-8 * max(np.trace(gram) / gram.shape[0], 1.0)
    gram[1:, 1:] += ridge * np.eye(gram.shape[0] - 1)
    try:
        beta = np.linalg.solve(gram, A.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"spline system is singular; raise lam above {lam}") from exc
    if not np.isfinite(beta).all():
        raise SingularSystem(f"spline solve produced non-finite coefficients at lam={lam}")
    coefs = tuple(beta[1 + j * n_knots:1 + (j + 1) * n_knots] for j in range(p))
    return GAMModel(knots=tuple(knots), basis_means=tuple(means), coefs=coefs,
                    intercept=float(beta[0]), x_lo=x_lo, x_hi=x_hi, lam=lam)
