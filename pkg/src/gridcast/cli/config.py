"""Experiment and synthetic-dataset configuration files.

Configs are JSON, validated against strict schemas (unknown keys are
rejected). The canonical serialized form is hashed to derive deterministic
run identifiers, so a rerun of the same config lands in the same directory.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema

from ..errors import ConfigError
from ..gridstore import SECTORS
from ..hpo import Dim, HPSpace, default_space
from ..models import HYPERPARAM_DEFAULTS, MODEL_FAMILIES

# ERA5-style daily reanalysis fields: abbreviation -> (unit, sectors)
VARIABLE_CATALOG = {
    "t2m": ("K", ("Solar", "Wind")),
    "ssrd": ("J/m^2", ("Solar",)),
    "u10": ("m/s", ("Wind",)),
    "v10": ("m/s", ("Wind",)),
    "u100": ("m/s", ("Wind",)),
    "v100": ("m/s", ("Wind",)),
    "i10fg": ("m/s", ("Solar", "Wind")),
    "tp": ("m", ("Wind",)),
    "e": ("m", ("Solar",)),
    "ro": ("m", ("Wind",)),
}

_GRID_SCHEMA = {
    "type": "object",
    "properties": {
        "lat0": {"type": "number"}, "dlat": {"type": "number",
                                             "exclusiveMinimum": 0},
        "nlat": {"type": "integer", "minimum": 1},
        "lon0": {"type": "number"}, "dlon": {"type": "number",
                                             "exclusiveMinimum": 0},
        "nlon": {"type": "integer", "minimum": 1},
    },
    "required": ["lat0", "dlat", "nlat", "lon0", "dlon", "nlon"],
    "additionalProperties": False,
}

_DATE = {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}$"}

_CV_SCHEMA = {
    "type": "object",
    "properties": {
        "scheme": {"enum": ["holdout", "kfold", "expanding", "sliding",
                            "blocking"]},
        "shuffle": {"type": "boolean"},
        "K": {"type": "integer", "minimum": 2},
        "block_len": {"type": "integer", "minimum": 1},
        "test_fraction": {"type": "number", "exclusiveMinimum": 0,
                          "exclusiveMaximum": 1},
        "rng_seed": {"type": "integer", "minimum": 0},
    },
    "required": ["scheme"],
    "additionalProperties": False,
}

_DIM_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": ["int", "float", "log_float", "categorical"]},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "choices": {"type": "array", "minItems": 1},
    },
    "required": ["name", "kind"],
    "additionalProperties": False,
}

_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": list(MODEL_FAMILIES)},
        "hyperparams": {"type": "object"},
        "space": {"type": "array", "items": _DIM_SCHEMA},
    },
    "required": ["family"],
    "additionalProperties": False,
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "sector": {"enum": list(SECTORS)},
        "data_dir": {"type": "string"},
        "grid": _GRID_SCHEMA,
        "variables": {"type": "array", "minItems": 1,
                      "items": {"enum": sorted(VARIABLE_CATALOG)}},
        "split": {
            "type": "object",
            "properties": {"train_end": _DATE, "val_end": _DATE,
                           "test_end": _DATE},
            "required": ["train_end", "val_end", "test_end"],
            "additionalProperties": False,
        },
        "views": {"type": "array", "minItems": 1,
                  "items": {"enum": ["Average", "Components", "Image"]}},
        "n_components": {"type": "integer", "minimum": 1},
        "models": {"type": "array", "minItems": 1, "items": _MODEL_SCHEMA},
        "cv": _CV_SCHEMA,
        "schemes": {"type": "array", "minItems": 1, "items": _CV_SCHEMA},
        "hpo": {
            "type": "object",
            "properties": {"algo": {"enum": ["random", "bayes"]},
                           "budget": {"type": "integer", "minimum": 1}},
            "required": ["algo", "budget"],
            "additionalProperties": False,
        },
        "detrend": {"type": "array", "minItems": 1,
                    "items": {"type": "boolean"}},
        "mi_threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "sizes": {"type": "array", "minItems": 1,
                  "items": {"type": "integer", "minimum": 2}},
        "n_trials": {"type": "integer", "minimum": 1},
        "model_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "out_dir": {"type": "string"},
    },
    "required": ["sector", "data_dir", "variables", "split", "views",
                 "models", "cv", "hpo", "detrend", "seed", "out_dir"],
    "additionalProperties": False,
}

SYNTH_SCHEMA = {
    "type": "object",
    "properties": {
        "sector": {"enum": list(SECTORS)},
        "n_days": {"type": "integer", "minimum": 30},
        "t0": _DATE,
        "grid": _GRID_SCHEMA,
        "variables": {"type": "array", "minItems": 1,
                      "items": {"enum": sorted(VARIABLE_CATALOG)}},
        "n_facilities": {"type": "integer", "minimum": 1},
        "growth": {
            "type": "array", "minItems": 2,
            "items": {"type": "array", "minItems": 2, "maxItems": 2,
                      "items": {"type": "number"}},
        },
        "seasonal_amplitudes": {"type": "array", "minItems": 1,
                                "items": {"type": "number", "minimum": 0}},
        "noise_sigma": {"type": "number", "minimum": 0},
        "link": {"enum": ["linear", "quadratic_saturating"]},
        "seed": {"type": "integer", "minimum": 0},
        "out_dir": {"type": "string"},
    },
    "required": ["sector", "n_days", "grid", "variables", "growth",
                 "seasonal_amplitudes", "noise_sigma", "link", "seed"],
    "additionalProperties": False,
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def run_id(command: str, config: dict) -> str:
    return f"{command}-{config_hash(config)[:12]}"


def _validate(config: dict, schema: dict, label: str) -> dict:
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{label} invalid at {where}: {exc.message}") from exc
    return config


def load_config_file(path) -> dict:
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"{p}: top level must be a JSON object")
    return config


def _check_sector_variables(config: dict, label: str) -> None:
    sector = config["sector"]
    bad = [v for v in config["variables"]
           if sector not in VARIABLE_CATALOG[v][1]]
    if bad:
        raise ConfigError(f"{label}: variables {bad} are not used for {sector}")


def validate_experiment(config: dict) -> dict:
    _validate(config, EXPERIMENT_SCHEMA, "experiment config")
    _check_sector_variables(config, "experiment config")
    if len(set(config["variables"])) != len(config["variables"]):
        raise ConfigError("experiment config: duplicate variables")
    for entry in config["models"]:
        known = set(HYPERPARAM_DEFAULTS[entry["family"]])
        named = ([d["name"] for d in entry.get("space", [])]
                 + list(entry.get("hyperparams", {})))
        unknown = sorted(set(named) - known)
        if unknown:
            raise ConfigError(f"experiment config: {entry['family']} has no "
                              f"hyperparameters {unknown}")
        model_space(entry)
    return config


def validate_synth(config: dict) -> dict:
    _validate(config, SYNTH_SCHEMA, "synth config")
    _check_sector_variables(config, "synth config")
    if len(config["seasonal_amplitudes"]) != len(config["variables"]):
        raise ConfigError("synth config: one seasonal amplitude per variable")
    days = [b[0] for b in config["growth"]]
    if days != sorted(days) or len(set(days)) != len(days):
        raise ConfigError("synth config: growth breakpoints must ascend in time")
    if any(b[1] < 0 for b in config["growth"]):
        raise ConfigError("synth config: growth capacities must be >= 0")
    if max(b[1] for b in config["growth"]) <= 0:
        raise ConfigError("synth config: growth curve is identically zero")
    return config


def model_space(entry: dict) -> HPSpace:
    """The search space of one config model entry.

    An explicit `space` wins; fixed `hyperparams` mean no search; otherwise
    the family default is used.
    """
    if "space" in entry:
        dims = []
        for d in entry["space"]:
            choices = tuple(_freeze(c) for c in d.get("choices", ()))
            dims.append(Dim(name=d["name"], kind=d["kind"],
                            lo=float(d.get("lo", 0.0)),
                            hi=float(d.get("hi", 1.0)), choices=choices))
        return HPSpace(tuple(dims))
    if "hyperparams" in entry:
        return HPSpace()
    return default_space(entry["family"])


def _freeze(value):
    return tuple(_freeze(v) for v in value) if isinstance(value, list) else value
