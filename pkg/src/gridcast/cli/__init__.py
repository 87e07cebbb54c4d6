"""Config-driven command line: synthetic data, benchmarks, and reports."""
from .benchmark import run_benchmark, run_cv_bench, tune_model, with_target
from .config import (VARIABLE_CATALOG, canonical_json, config_hash,
                     load_config_file, model_space, run_id,
                     validate_experiment, validate_synth)
from .main import main
from .pipeline import (DatasetBundle, PreparedData, build_view, load_dataset,
                       prepare, split_from_config)
from .report import render_report
from .synth import SynthSpec, synth_generate, true_expectation

__all__ = [
    "VARIABLE_CATALOG", "DatasetBundle", "PreparedData", "SynthSpec",
    "build_view", "canonical_json", "config_hash", "load_config_file",
    "load_dataset", "main", "model_space", "prepare", "render_report",
    "run_benchmark", "run_cv_bench", "run_id", "split_from_config",
    "synth_generate", "true_expectation", "tune_model", "validate_experiment",
    "validate_synth", "with_target",
]
