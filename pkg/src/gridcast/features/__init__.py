"""Dataset views, PCA, trend removal, and chronological splitting."""
from .pca import PCAModel, fit_pca
from .splits import SplitSpec, default_split, make_chronological_split
from .stl import TrendModel, fit_trend, stl_detrend
from .views import (VIEW_KINDS, DatasetView, build_average_view,
                    build_components_view, build_image_view, load_view,
                    save_view, spatial_average)

__all__ = [
    "PCAModel", "fit_pca",
    "SplitSpec", "default_split", "make_chronological_split",
    "TrendModel", "fit_trend", "stl_detrend",
    "VIEW_KINDS", "DatasetView", "build_average_view", "build_components_view",
    "build_image_view", "load_view", "save_view", "spatial_average",
]
