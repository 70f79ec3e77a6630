"""JSON experiment configs: schema, validation, and construction of run objects.

A config names an instance, a center, a measure and a bound::

    {
      "instance": {"kind": "hyperplanes", "N": 6, "degree": 2},
      "center": {"kind": "at_condition", "target": 4.0},
      "measure": {"kind": "uniform_cap", "theta": 0.3},
      "bound": "local_uniform",
      "n": 100000, "seed": 0, "stream": 0, "workers": 1,
      "output": "rows.csv"
    }

``validate`` configs may carry a ``cells`` list of partial configs, each
merged over the top-level keys; ``sweep`` configs carry a ``grid`` of theta
or sigma values. Infinite values may be written as the string ``"inf"``.
"""
import copy
import math

import jsonschema
import numpy as np

from .exceptions import ConfigError
from .instances import instance_from_spec
from .montecarlo import make_measure

_EXT = {"oneOf": [{"type": "number"}, {"const": "inf"}]}
_NONNEG = {"type": "number", "minimum": 0}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"properties": {"kind": {"const": "hyperplanes"},
                        "normals": {"type": "array", "minItems": 1,
                                    "items": {"type": "array", "minItems": 2,
                                              "items": {"type": "number"}}},
                        "N": {"type": "integer", "minimum": 1},
                        "degree": {"type": "integer", "minimum": 1},
                        "id": {"type": "string"}},
         "additionalProperties": False,
         "anyOf": [{"required": ["normals"]}, {"required": ["N", "degree"]}]},
        {"properties": {"kind": {"const": "determinant"},
                        "n": {"type": "integer", "minimum": 2},
                        "id": {"type": "string"}},
         "required": ["n"], "additionalProperties": False},
    ],
}

CENTER_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"properties": {"kind": {"const": "coords"},
                        "coords": {"type": "array", "minItems": 2, "items": {"type": "number"}},
                        "id": {"type": "string"}},
         "required": ["coords"], "additionalProperties": False},
        {"properties": {"kind": {"const": "on_sigma"}, "id": {"type": "string"}},
         "additionalProperties": False},
        {"properties": {"kind": {"const": "at_condition"}, "target": _EXT,
                        "id": {"type": "string"}},
         "required": ["target"], "additionalProperties": False},
    ],
}

MEASURE_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"properties": {"kind": {"const": "uniform_cap"}, "theta": _NONNEG},
         "additionalProperties": False},
        {"properties": {"kind": {"const": "gaussian"}, "sigma": _NONNEG},
         "additionalProperties": False},
        {"properties": {"kind": {"const": "sin_ball"},
                        "rho": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
         "required": ["rho"], "additionalProperties": False},
        {"properties": {"kind": {"const": "point_mass"}}, "additionalProperties": False},
    ],
}

_RUN_PROPS = {
    "instance": INSTANCE_SCHEMA,
    "center": CENTER_SCHEMA,
    "measure": MEASURE_SCHEMA,
    "bound": {"type": "string"},
    "n": {"type": "integer", "minimum": 100},
    "seed": {"type": "integer", "minimum": 0},
    "stream": {"type": "integer", "minimum": 0},
    "workers": {"type": "integer", "minimum": 1},
    "bound_offset": {"type": "number"},
    "output": {"type": "string"},
    "summary": {"type": "string"},
    "grid": {"type": "array", "minItems": 1, "items": _NONNEG},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "conicbounds experiment config",
    "type": "object",
    "properties": {**_RUN_PROPS,
                   "cells": {"type": "array", "minItems": 1, "items": {"type": "object"}}},
    "additionalProperties": False,
}

# a fully merged cell must have these
CELL_REQUIRED = ("instance", "center", "measure")

DEFAULTS = {"n": 100000, "seed": 0, "stream": 0, "workers": 1, "bound_offset": 0.0}


def _messages(errors):
    out = []
    for err in errors:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def validate_config(config):
    """Raise ConfigError listing schema violations; return the config unchanged."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(_messages(errors)))
    return config


def expand_cells(config, need_bound=True):
    """Merged per-cell configs (one if no ``cells`` key), each schema-checked."""
    validate_config(config)
    base = {k: v for k, v in config.items() if k != "cells"}
    cells = config.get("cells") or [{}]
    merged = []
    for i, cell in enumerate(cells):
        full = {**DEFAULTS, **copy.deepcopy(base), **copy.deepcopy(cell)}
        try:
            validate_config(full)
        except ConfigError as exc:
            raise ConfigError(f"cell {i}: {exc}") from None
        required = CELL_REQUIRED + (("bound",) if need_bound else ())
        missing = [k for k in required if k not in full]
        if missing:
            raise ConfigError(f"cell {i}: missing required keys {missing}")
        merged.append(full)
    return merged


def ext_float(value):
    return math.inf if value == "inf" else float(value)


def build_instance(spec):
    spec = dict(spec)
    ident = spec.pop("id", None)
    inst = instance_from_spec(spec)
    if ident is None:
        if spec["kind"] == "determinant":
            ident = f"det{spec['n']}"
        elif "normals" in spec:
            ident = f"hyperplanes_N{inst.ambient_dim}_d{inst.degree}"
        else:
            ident = f"coord_N{spec['N']}_d{spec['degree']}"
    return inst, ident


def build_center(instance, spec):
    kind = spec["kind"]
    if kind == "coords":
        x = np.asarray(spec["coords"], dtype=float)
        if x.shape != (instance.dim,):
            raise ConfigError(f"center has {x.size} coordinates, instance needs {instance.dim}")
        norm = np.linalg.norm(x)
        if norm == 0:
            raise ConfigError("center coordinates must be nonzero")
        return x / norm, spec.get("id", "coords")
    if kind == "on_sigma":
        return instance.center_on_sigma(), spec.get("id", "on_sigma")
    target = ext_float(spec["target"])
    if math.isinf(target):
        return instance.center_on_sigma(), spec.get("id", "cond_inf")
    return instance.center_at_condition(target), spec.get("id", f"cond_{target:g}")


def measure_nu(spec):
    kind = spec["kind"]
    key = {"uniform_cap": "theta", "gaussian": "sigma", "sin_ball": "rho"}.get(kind)
    if key is None:
        return kind, 0.0
    if key not in spec:
        raise ConfigError(f"measure {kind!r} needs {key!r}")
    return kind, float(spec[key])


def build_measure(center, spec):
    kind, nu = measure_nu(spec)
    return make_measure(kind, center, nu)
