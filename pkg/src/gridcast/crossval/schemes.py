"""Time-series cross-validation schemes over consecutive daily samples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewSamples

SCHEMES = ("holdout", "kfold", "expanding", "sliding", "blocking")
ORDER_PRESERVING = ("holdout", "expanding", "sliding")


@dataclass(frozen=True)
class SchemeParams:
    scheme: str
    shuffle: bool = False
    K: int = 10
    block_len: int = 7
    test_fraction: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if self.block_len < 1:
            raise ValueError(f"block_len must be >= 1, got {self.block_len}")
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.shuffle and self.scheme not in ("holdout", "kfold"):
            raise ValueError(f"shuffle is not defined for {self.scheme}")

    @property
    def label(self) -> str:
        return f"{self.scheme}+shuffle" if self.shuffle else self.scheme


@dataclass(frozen=True)
class SplitPlan:
    iterations: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        if not self.iterations:
            raise ValueError("a split plan needs at least one iteration")
        for k, (train, test) in enumerate(self.iterations):
            if len(train) == 0 or len(test) == 0:
                raise ValueError(f"iteration {k}: empty train or test side")
            if np.intersect1d(train, test).size:
                raise ValueError(f"iteration {k}: train and test overlap")

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)


def _holdout(n: int, p: SchemeParams) -> list[tuple[np.ndarray, np.ndarray]]:
    n_test = max(1, round(n * p.test_fraction))
    if n_test >= n:
        raise TooFewSamples(f"test_fraction {p.test_fraction} leaves no train rows")
    if p.shuffle:
        perm = np.random.default_rng(p.rng_seed).permutation(n)
        return [(np.sort(perm[:-n_test]), np.sort(perm[-n_test:]))]
    idx = np.arange(n)
    return [(idx[:-n_test], idx[-n_test:])]


def _folds(n: int, p: SchemeParams) -> list[np.ndarray]:
    if n < 2 * p.K:
        raise TooFewSamples(f"n={n} cannot host {p.K} folds of >= 2 rows")
    idx = np.arange(n)
    if p.shuffle:
        idx = np.random.default_rng(p.rng_seed).permutation(n)
    return np.array_split(idx, p.K)


def _kfold(n: int, p: SchemeParams) -> list[tuple[np.ndarray, np.ndarray]]:
    folds = _folds(n, p)
    out = []
    for k in range(p.K):
        train = np.sort(np.concatenate([f for i, f in enumerate(folds) if i != k]))
        out.append((train, np.sort(folds[k])))
    return out


def _ordered_folds(n: int, p: SchemeParams, expanding: bool
                   ) -> list[tuple[np.ndarray, np.ndarray]]:
    folds = _folds(n, p)
    out = []
    for k in range(p.K - 1):
        train = np.concatenate(folds[:k + 1]) if expanding else folds[k]
        out.append((train, folds[k + 1]))
    return out


def _blocking(n: int, p: SchemeParams) -> list[tuple[np.ndarray, np.ndarray]]:
    starts = np.arange(0, n, p.block_len)
    if len(starts) < 2:
        raise TooFewSamples(
            f"n={n} yields a single block of length {p.block_len}")
    rng = np.random.default_rng(p.rng_seed)
    to_test = rng.random(len(starts)) < p.test_fraction
    # both sides must exist; reassign one random block if a side came up empty
    if to_test.all():
        to_test[rng.integers(len(starts))] = False
    if not to_test.any():
        to_test[rng.integers(len(starts))] = True
    idx = np.arange(n)
    blocks = [idx[s:s + p.block_len] for s in starts]
    test = np.concatenate([b for b, t in zip(blocks, to_test) if t])
    train = np.concatenate([b for b, t in zip(blocks, to_test) if not t])
    return [(train, test)]


def make_splits(n: int, params: SchemeParams) -> SplitPlan:
    """Build the (train, test) iterations of the chosen scheme over [0, n)."""
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    if params.scheme == "holdout":
        iters = _holdout(n, params)
    elif params.scheme == "kfold":
        iters = _kfold(n, params)
    elif params.scheme == "expanding":
        iters = _ordered_folds(n, params, expanding=True)
    elif params.scheme == "sliding":
        iters = _ordered_folds(n, params, expanding=False)
    else:
        iters = _blocking(n, params)
    return SplitPlan(iterations=tuple(iters))
