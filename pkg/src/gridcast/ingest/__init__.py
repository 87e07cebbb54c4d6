"""Raw registries, weather stacks, and calendars to model-ready inputs."""

from .facilities import CapacityGrid, assign_to_grid, load_facilities
from .mi import kraskov_mi, select_variables_mi
from .resample import ACCUMULATED_VARS, aggregate_to_daily, default_how
from .temporal import (FEATURE_NAMES, FeatureColumn, day_length_hours,
                       day_of_year, doy_cosine, load_price, temporal_features)
from .weighting import WeightGrid, compute_weights, weight_weather, weighted_values

__all__ = [
    "CapacityGrid", "WeightGrid", "FeatureColumn",
    "load_facilities", "assign_to_grid",
    "compute_weights", "weight_weather", "weighted_values",
    "temporal_features", "day_of_year", "doy_cosine", "day_length_hours",
    "load_price", "FEATURE_NAMES",
    "select_variables_mi", "kraskov_mi",
    "aggregate_to_daily", "default_how", "ACCUMULATED_VARS",
]
