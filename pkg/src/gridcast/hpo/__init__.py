"""Hyperparameter optimization: spaces, random search, GP-Bayesian search."""
from .gp import GPSurrogate, gp_fit, matern52
from .search import (BayesSearcher, EIProposal, RandomSearcher, SearchResult,
                     Trial, bayesian_search, expected_improvement,
                     make_searcher, propose_ei, random_search)
from .space import DIM_KINDS, Dim, HPSpace, default_space

__all__ = [
    "GPSurrogate", "gp_fit", "matern52",
    "BayesSearcher", "EIProposal", "RandomSearcher", "SearchResult", "Trial",
    "bayesian_search", "expected_improvement", "make_searcher", "propose_ei",
    "random_search",
    "DIM_KINDS", "Dim", "HPSpace", "default_space",
]
