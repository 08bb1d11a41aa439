"""Run configuration: versioned schema, strict validation, explicit defaults.

A run is described by one JSON document.  Validation is strict (unknown
keys are rejected) and happens before any computation; the fully resolved
configuration, defaults included, is echoed into every report so no run
depends on hidden state.
"""

from __future__ import annotations

import copy
import json

import jsonschema

CONFIG_VERSION = 1

MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "h": {"type": "number", "exclusiveMinimum": 0},
        "J": {"type": "integer", "minimum": 1},
        "N_x": {"type": "integer", "minimum": 8},
        "normalize_u": {"type": "boolean"},
    },
}

WEIGHT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["standard", "smoothed_integer", "user_table"]},
        "path": {"type": "string"},
        "mu0": {"type": "number", "exclusiveMinimum": 0},
        "mu1": {"type": "number", "exclusiveMinimum": 0},
        "mu": {"type": "number", "exclusiveMinimum": 0},
    },
}

SYMBOL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {
            "enum": ["multiplier_power", "separable", "elliptic_demo", "shifted", "csv"]
        },
        "m": {"type": "number"},
        "profile": {
            "enum": ["one", "sin", "cos", "two_plus_sin", "two_plus_cos"]
        },
        "shift": {"type": "number"},
        "rho": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "csv": {"type": "string"},
    },
}

TASK_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "samples": {"type": "integer", "minimum": 1},
        "band": {"type": ["integer", "null"], "minimum": 1},
        "alpha_max": {"type": "integer", "minimum": 0},
        "beta_max": {"type": "integer", "minimum": 0},
        "ellipticity_R": {"type": "integer", "minimum": 0},
        "hypoellipticity_ell": {"type": ["number", "null"]},
        "truncation_terms": {"type": "integer", "minimum": 1},
        "cutoff_radius": {"type": "integer", "minimum": 0},
        "shells": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "eps_ladder": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "sobolev_s": {"type": "number"},
        "sobolev_t": {"type": "number"},
        "lambda": {"type": "number"},
        "solver_method": {"enum": ["dense", "parametrix_iteration"]},
        "symbol_b": copy.deepcopy(SYMBOL_SCHEMA),
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["version"],
    "properties": {
        "version": {"const": CONFIG_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "model": MODEL_SCHEMA,
        "weight": WEIGHT_SCHEMA,
        "symbol": SYMBOL_SCHEMA,
        "task": TASK_SCHEMA,
    },
}

DEFAULT_CONFIG = {
    "version": CONFIG_VERSION,
    "seed": 12345,
    "model": {"h": 2.0, "J": 64, "N_x": 512, "normalize_u": False},
    "weight": {"kind": "standard", "mu0": 1.0, "mu1": 1.0, "mu": 1.0},
    "symbol": {
        "family": "elliptic_demo",
        "m": 2.0,
        "profile": "two_plus_sin",
        "shift": 0.5,
        "rho": 1.0,
    },
    "task": {
        "samples": 200,
        "band": None,
        "alpha_max": 3,
        "beta_max": 2,
        "ellipticity_R": 8,
        "hypoellipticity_ell": None,
        "truncation_terms": 3,
        "cutoff_radius": 8,
        "shells": [0, 2, 4, 8, 16, 24, 32, 40, 48, 56],
        "eps_ladder": [1.0, 0.1, 0.01],
        "sobolev_s": 2.0,
        "sobolev_t": 1.0,
        "lambda": 1.0,
        "solver_method": "dense",
    },
}


class ConfigError(ValueError):
    """Invalid run configuration; carries a machine-readable error list."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate_config(raw: dict) -> list[str]:
    """All schema violations as strings (empty list means valid)."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    return [
        f"{'/'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(raw), key=str)
    ]


def resolve_config(raw: dict) -> dict:
    """Validate and fill defaults; raises :class:`ConfigError` when invalid."""
    errors = validate_config(raw)
    if errors:
        raise ConfigError(errors)
    resolved = _merge(DEFAULT_CONFIG, raw)
    # semantic checks that the schema cannot express
    model = resolved["model"]
    if model["N_x"] <= 4 * model["J"] + 2:
        raise ConfigError(
            [f"model: N_x = {model['N_x']} must exceed 4 J + 2 = {4 * model['J'] + 2}"]
        )
    weight = resolved["weight"]
    if weight["kind"] == "user_table" and "path" not in weight:
        raise ConfigError(["weight: user_table requires a path"])
    if not (weight["mu0"] <= weight["mu1"] <= weight["mu"]):
        raise ConfigError(["weight: exponents must satisfy mu0 <= mu1 <= mu"])
    symbol = resolved["symbol"]
    if symbol["family"] == "csv" and "csv" not in symbol:
        raise ConfigError(["symbol: csv family requires a csv path"])
    if symbol["rho"] > 1.0 / weight["mu"]:
        raise ConfigError(
            [f"symbol: rho = {symbol['rho']} exceeds 1/mu = {1.0 / weight['mu']}"]
        )
    second = resolved["task"].get("symbol_b")
    if second is not None and "family" not in second:
        raise ConfigError(["task/symbol_b: family is required"])
    return resolved


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
    return resolve_config(raw)
