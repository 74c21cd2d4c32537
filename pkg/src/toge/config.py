"""Run configuration: JSON schema, defaults and validation."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from jsonschema import Draft7Validator

from .errors import SchemaError, TogeError
from .polytope import DelzantPolytope, build_polytope
from .potential import SymplecticPotential, bargmann_fock, canonical, convexity_check
from .quantize import QuadConfig

__all__ = ["SCHEMA", "DEFAULTS", "COMMANDS", "PAIR_COMMANDS", "RunConfig", "parse_config",
           "load_config"]

COMMANDS = ("validate", "qconst", "pkernel", "szego", "geodesic", "rk", "converge", "rates",
            "oracle")
PAIR_COMMANDS = ("geodesic", "rk", "converge", "rates")

_POLY_TERM = {
    "type": "object",
    "required": ["exp", "coef"],
    "properties": {
        "exp": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "coef": {"type": "number"},
    },
    "additionalProperties": False,
}

_POTENTIAL = {
    "type": "object",
    "properties": {
        "model": {"enum": ["canonical", "bargmann_fock"]},
        "smooth_part": {"type": "array", "items": _POLY_TERM},
        "length": {"type": "integer", "minimum": 1},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}

_POLYTOPE = {
    "oneOf": [
        {"enum": ["interval", "simplex", "cube", "hirzebruch"]},
        {
            "type": "object",
            "required": ["name"],
            "properties": {
                "name": {"enum": ["interval", "simplex", "cube", "hirzebruch"]},
                "m": {"type": "integer", "minimum": 1, "maximum": 3},
                "a": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["facets"],
            "properties": {
                "name": {"type": "string"},
                "facets": {
                    "type": "array",
                    "minItems": 2,
                    "items": {
                        "type": "object",
                        "required": ["normal", "offset"],
                        "properties": {
                            "normal": {"type": "array", "items": {"type": "integer"},
                                       "minItems": 1},
                            "offset": {"type": "integer"},
                        },
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "toge run configuration",
    "type": "object",
    "required": ["polytope", "u0"],
    "properties": {
        "polytope": _POLYTOPE,
        "u0": _POTENTIAL,
        "u1": _POTENTIAL,
        "k_values": {"type": "array", "minItems": 1,
                     "items": {"type": "integer", "minimum": 1, "maximum": 512}},
        "t_grid": {"type": "integer", "minimum": 3},
        "x_grid": {"type": "integer", "minimum": 3},
        "margin": {"type": "number", "exclusiveMinimum": 0},
        "quadrature": {
            "type": "object",
            "properties": {
                "cells_per_axis": {"type": "integer", "minimum": 2},
                "gauss_order": {"type": "integer", "minimum": 1},
                "refine_factor": {"type": "number", "exclusiveMinimum": 1},
                "grade_levels": {"type": "integer", "minimum": 0},
                "rtol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "rho": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "alpha": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "t_values": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "localization_delta": {"type": "number", "exclusiveMinimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "k_values": [16, 32, 64, 128],
    "t_grid": 11,
    "x_grid": 33,
    "margin": 0.02,
    "quadrature": {"cells_per_axis": 32, "gauss_order": 16, "refine_factor": 4.0,
                   "grade_levels": 3, "rtol": 1e-8},
    "localization_delta": 0.1,
}


@dataclass
class RunConfig:
    data: dict  # validated config with defaults filled
    polytope: DelzantPolytope
    u0: SymplecticPotential
    u1: SymplecticPotential | None
    quad: QuadConfig
    digest: str  # sha256 of the canonical JSON of ``data``

    @property
    def k_values(self) -> list:
        return list(self.data["k_values"])

    @property
    def threads(self) -> int | None:
        return self.data.get("threads")

    def rho_points(self) -> np.ndarray:
        m = self.polytope.dim
        if "rho" in self.data:
            return np.asarray(self.data["rho"], dtype=float).reshape(-1, m)
        return np.zeros((1, m))


def _fill_defaults(raw: dict) -> dict:
    data = copy.deepcopy(raw)
    for key, val in DEFAULTS.items():
        if key == "quadrature":
            data[key] = {**val, **data.get(key, {})}
        else:
            data.setdefault(key, copy.deepcopy(val))
    return data


def _potential(spec: dict, P: DelzantPolytope, where: str, errors: list):
    model = spec.get("model", "canonical")
    if model == "bargmann_fock":
        u = bargmann_fock(spec.get("length", 1), P.dim)
        same = (sorted(map(tuple, u.polytope.vertices.tolist()))
                == sorted(map(tuple, P.vertices.tolist())))
        if not same:
            errors.append(f"{where}: bargmann_fock needs the polytope [0, length]^m")
        if "smooth_part" in spec:
            errors.append(f"{where}: smooth_part is not allowed with bargmann_fock")
        return u
    for i, term in enumerate(spec.get("smooth_part", [])):
        if len(term["exp"]) != P.dim:
            errors.append(f"{where}/smooth_part/{i}/exp: length {len(term['exp'])} != dim {P.dim}")
    if errors:
        return None
    return canonical(P, spec.get("smooth_part") or None, label=spec.get("label", where))


def parse_config(raw: dict, command: str | None = None, check_convexity: bool = True) -> RunConfig:
    """Validate a configuration dict and build its objects.

    Every schema violation is collected before raising :class:`SchemaError`.
    """
    errors = []
    for err in sorted(Draft7Validator(SCHEMA).iter_errors(raw), key=lambda e: list(e.path)):
        path = "/".join(str(p) for p in err.path) or "<root>"
        errors.append(f"{path}: {err.message}")
    if errors:
        raise SchemaError(errors)
    data = _fill_defaults(raw)
    ks = data["k_values"]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        errors.append("k_values: k_values not increasing")
    if command is not None and command not in COMMANDS:
        errors.append(f"command: unknown command {command!r}")
    if command in PAIR_COMMANDS and "u1" not in data:
        errors.append(f"u1: required for command {command!r}")
    try:
        P = build_polytope(data["polytope"])
    except TogeError as e:
        raise SchemaError(errors + [f"polytope: {type(e).__name__}: {e}"]) from None
    u0 = _potential(data["u0"], P, "u0", errors)
    u1 = _potential(data["u1"], P, "u1", errors) if "u1" in data else None
    m = P.dim
    for key in ("rho", "alpha"):
        for i, v in enumerate(data.get(key, [])):
            if len(v) != m:
                errors.append(f"{key}/{i}: length {len(v)} != dim {m}")
    if errors:
        raise SchemaError(errors)
    if u1 is not None and not u0.same_log_part(u1):
        errors.append("u1: endpoints must share polytope and logarithmic part")
    if check_convexity:
        for name, u in (("u0", u0), ("u1", u1)):
            if u is not None:
                lam = convexity_check(u)
                if not lam > 0:
                    errors.append(f"{name}: not strictly convex (min Hessian eigenvalue {lam:.6g})")
    if errors:
        raise SchemaError(errors)
    quad = QuadConfig(**data["quadrature"])
    digest = hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()
    return RunConfig(data, u0.polytope, u0, u1, quad, digest)


def load_config(path, command: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise SchemaError([f"{path}: {e.strerror}"]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError([f"{path}: invalid JSON ({e})"]) from None
    return parse_config(raw, command)
