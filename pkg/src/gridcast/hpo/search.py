"""Random and GP-Bayesian hyperparameter search (minimization).

Both searchers share an ask/tell interface so callers can drive the loop
themselves (the cross-validation experiment harness does) or use the
one-shot `random_search` / `bayesian_search` functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .gp import GPSurrogate, gp_fit
from .space import HPSpace


@dataclass(frozen=True)
class EIProposal:
    u: np.ndarray        # unit-cube coordinates
    ei: float
    fallback: bool       # True when every candidate had zero variance


def expected_improvement(mean: np.ndarray, var: np.ndarray,
                         best: float) -> np.ndarray:
    """Closed-form EI for minimization; zero-variance points improve only
    deterministically."""
    sigma = np.sqrt(np.maximum(var, 0.0))
    gap = best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, gap / np.where(sigma > 0, sigma, 1.0), 0.0)
    phi = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    ei = np.where(sigma > 0, gap * ndtr(z) + sigma * phi, np.maximum(gap, 0.0))
    return np.maximum(ei, 0.0)


def propose_ei(surrogate: GPSurrogate, best_so_far: float,
               n_candidates: int = 1000, seed: int = 0) -> EIProposal:
    """Best-EI point among uniform unit-cube candidates."""
    rng = np.random.default_rng(seed)
    cands = rng.random((n_candidates, surrogate.X.shape[1]))
    mean, var = surrogate.predict(cands)
    if (var <= 0).all():
        return EIProposal(u=rng.random(surrogate.X.shape[1]), ei=0.0,
                          fallback=True)
    ei = expected_improvement(mean, var, best_so_far)
    k = int(np.argmax(ei))
    return EIProposal(u=cands[k], ei=float(ei[k]), fallback=False)


@dataclass
class Trial:
    trial_id: int
    point: dict
    score: float | None
    error: str | None = None


@dataclass
class SearchResult:
    trials: list[Trial]

    @property
    def best(self) -> Trial:
        done = [t for t in self.trials if t.score is not None]
        if not done:
            raise ValueError("every trial failed")
        return min(done, key=lambda t: t.score)


class RandomSearcher:
    """I.i.d. uniform proposals; the sequence depends only on (space, seed)."""

    def __init__(self, space: HPSpace, seed: int = 0):
        self.space = space
        self._rng = np.random.default_rng(seed)

    def ask(self) -> dict:
        return self.space.sample(self._rng)

    def tell(self, point: dict, score: float | None) -> None:
        pass


class BayesSearcher:
    """EI on a GP surrogate after `n_init` seeding draws.

    `liar_width` > 1 enables constant-liar batching: that many points are
    proposed per surrogate refit, pending points scored with the running
    mean so parallel evaluation stays deterministic.
    """

    def __init__(self, space: HPSpace, seed: int = 0, n_init: int = 5,
                 n_candidates: int = 1000, liar_width: int = 1):
        if liar_width < 1:
            raise ValueError(f"liar_width must be >= 1, got {liar_width}")
        self.space = space
        self.seed = seed
        self.n_init = max(2, n_init)
        self.n_candidates = n_candidates
        self.liar_width = liar_width
        self._rng = np.random.default_rng(seed)
        self._obs_u: list[np.ndarray] = []
        self._obs_y: list[float] = []
        self._asked = 0
        self._pending: list[np.ndarray] = []

    def ask(self) -> dict:
        self._asked += 1
        if (self.space.encoded_dim == 0 or len(self._obs_y) < 2
                or self._asked <= self.n_init):
            return self.space.sample(self._rng)
        u_obs = self._obs_u + self._pending
        liar = float(np.mean(self._obs_y))
        y_obs = self._obs_y + [liar] * len(self._pending)
        surrogate = gp_fit(np.vstack(u_obs), np.array(y_obs))
        proposal = propose_ei(surrogate, best_so_far=min(self._obs_y),
                              n_candidates=self.n_candidates,
                              seed=self.seed + 7919 * self._asked)
        if self.liar_width > 1:
            self._pending.append(proposal.u)
            if len(self._pending) >= self.liar_width:
                self._pending.clear()
        return self.space.decode(proposal.u)

    def tell(self, point: dict, score: float | None) -> None:
        if score is None:
            return
        self._obs_u.append(self.space.encode(point))
        self._obs_y.append(float(score))


def make_searcher(algo: str, space: HPSpace, seed: int = 0, **kwargs):
    if algo == "random":
        return RandomSearcher(space, seed=seed)
    if algo == "bayes":
        return BayesSearcher(space, seed=seed, **kwargs)
    raise ValueError(f"unknown search algorithm {algo!r}")


def _run(searcher, objective, budget: int) -> SearchResult:
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    trials = []
    for t in range(budget):
        point = searcher.ask()
        try:
            score = float(objective(point))
            error = None
        except Exception as exc:   # failed trial consumes budget
            score, error = None, f"{type(exc).__name__}: {exc}"
        searcher.tell(point, score)
        trials.append(Trial(trial_id=t, point=point, score=score, error=error))
    return SearchResult(trials=trials)


def random_search(space: HPSpace, objective, budget: int,
                  seed: int = 0) -> SearchResult:
    return _run(RandomSearcher(space, seed=seed), objective, budget)


def bayesian_search(space: HPSpace, objective, budget: int, seed: int = 0,
                    n_init: int = 5, n_candidates: int = 1000,
                    liar_width: int = 1) -> SearchResult:
    searcher = BayesSearcher(space, seed=seed, n_init=n_init,
                             n_candidates=n_candidates, liar_width=liar_width)
    return _run(searcher, objective, budget)
