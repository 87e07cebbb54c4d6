"""Accuracy metrics, permutation importance, and occlusion attribution."""
from .importance import ImportanceResult, permutation_importance
from .metrics import MetricSet, mae, mape, metrics, nrmse, r2, rmse
from .occlusion import AttributionMap, occlusion_map

__all__ = [
    "ImportanceResult", "permutation_importance",
    "MetricSet", "mae", "mape", "metrics", "nrmse", "r2", "rmse",
    "AttributionMap", "occlusion_map",
]
