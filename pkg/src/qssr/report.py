"""Deterministic JSON reports."""

import dataclasses
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .poly import Polynomial
from .rational import RationalFunction

SCHEMA_VERSION = 1


def jsonable(obj):
    """Plain JSON data: polynomials become canonical text, rationals "p/q"."""
    if isinstance(obj, (Polynomial, RationalFunction)):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.name not in ("spline",)}
    return str(obj)


def dumps(report):
    data = dict(jsonable(report))
    data["schema_version"] = SCHEMA_VERSION
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_report(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report), encoding="utf-8")
    return path


def reduced_system_report(red):
    out = {"mode": red.mode, "time_scale": red.time_scale, "states": list(red.states),
           "field": {s: str(f) for s, f in zip(red.states, red.field)},
           "variety": [str(p) for p in red.variety],
           "excluded_locus": str(red.excluded_locus)}
    if "psi" in red.extras:
        out["qss_solution"] = {k: str(v) for k, v in red.extras["psi"].items()}
    return out
