"""Variable selection by k-nearest-neighbor mutual information.

Implements the Kraskov-Stögbauer-Grassberger estimator (first variant) for
scalar pairs: distances in max-norm, digamma correction from marginal
neighbor counts inside the kth-neighbor radius.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from ..gridstore import Series


def kraskov_mi(x: np.ndarray, y: np.ndarray, k: int = 3,
               rng: np.random.Generator | None = None) -> float:
    """Estimated mutual information (nats) between two scalar samples.

    Ties are broken by adding uniform jitter of 1e-10 times each variable's
    standard deviation. Returns 0.0 when either sample is constant.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    n = x.size
    if n <= k + 1:
        raise ValueError(f"need more than k+1={k + 1} samples, got {n}")

    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    x = x + rng.random(n) * 1e-10 * sx
    y = y + rng.random(n) * 1e-10 * sy

    joint = np.column_stack([x, y])
    tree = cKDTree(joint)
    # k+1 because the point itself is its own nearest neighbor
    eps = tree.query(joint, k=k + 1, p=np.inf)[0][:, k]

    def strict_counts(v: np.ndarray) -> np.ndarray:
        order = np.sort(v)
        hi = np.searchsorted(order, v + eps, side="left")
        lo = np.searchsorted(order, v - eps, side="right")
        return hi - lo - 1  # exclude the point itself

    nx = strict_counts(x)
    ny = strict_counts(y)
    mi = digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1))
    return float(mi)


def select_variables_mi(candidates: dict[str, np.ndarray], target: np.ndarray,
                        threshold: float = 0.20, k: int = 3, seed: int = 0,
                        return_scores: bool = False):
    """Names of candidates whose max-normalized MI score reaches `threshold`.

    All scores are divided by the best candidate's score so the strongest
    variable scores 1; constant candidates score 0 and are never selected.
    Names come back in the candidates' insertion order. With `return_scores`
    the normalized scores ride along as a second value.
    """
    rng = np.random.default_rng(seed)
    target = np.asarray(target, dtype=np.float64)
    scores = {
        name: max(kraskov_mi(np.asarray(x, dtype=np.float64), target, k=k, rng=rng), 0.0)
        for name, x in candidates.items()
    }
    best = max(scores.values(), default=0.0)
    normalized = {name: (s / best if best > 0 else 0.0)
                  for name, s in scores.items()}
    kept = ([] if best <= 0.0 else
            [name for name, s in normalized.items() if s >= threshold])
    return (kept, normalized) if return_scores else kept
