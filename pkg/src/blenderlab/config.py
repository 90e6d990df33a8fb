"""Experiment configuration: one JSON file, validated against a versioned schema.

Unknown keys are rejected at every level. Command-line flags override the
``run`` block (seed, workers, tolerance).
"""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

import jsonschema

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_POS_INT = {"type": "integer", "minimum": 1}
_INTERVAL = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_JET = {"type": "string", "pattern": r"^\s*\S+(\s+\S+)*\s*$"}

MAP_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["identity", "polynomial", "affine", "poly_bump", "mobius", "compose",
                          "local_diffeo", "wiggle", "flatten", "germ", "word"]},
        "coeffs": {"type": "array", "items": _NUM},
        "slope": _NUM,
        "intercept": _NUM,
        "bumps": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}},
        "params": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
        "maps": {"type": "array", "items": {"$ref": "#/$defs/map"}},
        "constraints": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}},
        "support": _INTERVAL,
        "plateau": {"type": ["number", "null"]},
        "count": _POS_INT,
        "amplitude_safety": _NUM,
        "margin": _NUM,
        "base": {"$ref": "#/$defs/map"},
        "x": _NUM,
        "window": _INTERVAL,
        "inner": _NUM,
        "target": {"type": "array", "items": _NUM},
        "semigroup": {"type": "object"},
        "word": {"type": "string"},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "semigroup"],
    "additionalProperties": False,
    "$defs": {"map": MAP_SCHEMA},
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "semigroup": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "example": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {k: _NUM for k in ("q0", "p", "q1", "r", "delta", "eps")},
                },
                "generators": {"type": "array", "items": {"$ref": "#/$defs/map"}, "minItems": 1},
                "name": {"type": "string"},
            },
            "oneOf": [{"required": ["example"]}, {"required": ["generators"]}],
        },
        "J": _INTERVAL,
        "blender_letters": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2,
                            "maxItems": 2},
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                           "workers": _POS_INT, "tolerance": {"type": "number", "exclusiveMinimum": 0}},
        },
        "classify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"w_sharp_grid": _POS_INT, "w_sharp_depth": _POS_INT},
        },
        "blender": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"eps": {"type": "number", "exclusiveMinimum": 0}, "max_length": _POS_INT},
        },
        "invariants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "z0": {"type": "array", "items": _NUM},
                "samples_per_pair": _POS_INT,
                "n_max": _POS_INT,
            },
        },
        "census": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n_max": _INT, "resolution": _POS_INT, "max_words": _POS_INT,
                           "brute_force": {"type": "integer", "minimum": 0}},
        },
        "randwords": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n": _INT, "trials": _POS_INT, "grid": _POS_INT, "resolution": _POS_INT},
        },
        "flatpoint": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pair": _INTERVAL,
                "z_star": _NUM,
                "U": _INTERVAL,
                "min_period": _INT,
                "target_log": _NUM,
                "count": _POS_INT,
                "resolution": _POS_INT,
                "second": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"pair": _INTERVAL, "z_star": _NUM, "target_log": _NUM},
                },
            },
        },
        "germ_demo": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lemma": {"enum": ["two_flat", "next_order", "commutator"]},
                "F1": _JET,
                "F2": _JET,
                "F": {"type": "array", "items": _JET, "minItems": 4, "maxItems": 4},
                "alpha": {"type": "string"},
                "beta": {"type": "string"},
                "r": _POS_INT,
                "exact": {"type": "boolean"},
            },
        },
    },
}

DEFAULTS = {
    "run": {"seed": 0, "workers": 1, "tolerance": 1e-9},
    "classify": {"w_sharp_grid": 10 ** 4, "w_sharp_depth": 1000},
    "blender": {"eps": 1e-3, "max_length": 5000},
    "invariants": {"samples_per_pair": 5, "n_max": 2 ** 21},
    "census": {"n_max": 2, "resolution": 2 ** 14, "max_words": 10 ** 6, "brute_force": 0},
    "randwords": {"n": 200, "trials": 100, "grid": 2001, "resolution": 2 ** 12},
    "flatpoint": {"pair": [0.5, 0.1], "z_star": 0.3, "min_period": 0, "target_log": 3.0, "count": 50,
                  "resolution": 2 ** 12},
    "germ_demo": {"lemma": "two_flat", "F1": "1 1 2", "F2": "1 -1 1/2", "alpha": "0", "beta": "0", "r": 2,
                  "exact": True},
}


class ConfigError(ValueError):
    """The configuration file is missing, malformed or violates the schema."""


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


def with_defaults(cfg: dict) -> dict:
    out = copy.deepcopy(cfg)
    for section, values in DEFAULTS.items():
        out[section] = {**values, **out.get(section, {})}
    return out


def load(path=None) -> dict:
    """Read, validate and fill defaults; ``None`` loads the bundled example config."""
    try:
        if path is None:
            text = resources.files("blenderlab").joinpath("data/example.json").read_text()
        else:
            text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    validate(cfg)
    return with_defaults(cfg)


def build_semigroup(cfg: dict):
    """Semigroup and interval ``J`` described by ``cfg``."""
    from .examples import polynomial_example
    from .maps import from_record
    from .semigroup import Semigroup

    sg = cfg["semigroup"]
    if "example" in sg:
        rho = polynomial_example(**sg["example"])
    else:
        rho = Semigroup([from_record(r) for r in sg["generators"]], sg.get("name", "custom"))
    J = cfg.get("J") or rho.params.get("J")
    if J is None:
        raise ConfigError("J must be given for custom semigroups")
    return rho, tuple(float(v) for v in J)
