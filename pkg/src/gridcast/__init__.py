"""gridcast: daily national solar/wind power forecasting toolkit.

Pipeline: capacity-weighted gridded weather ingestion, model-ready dataset
views, a fit/predict model zoo, time-series cross-validation and HPO
experimentation, and evaluation/attribution tooling.
"""

__version__ = "0.1.0"
