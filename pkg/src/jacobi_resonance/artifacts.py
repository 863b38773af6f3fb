"""Artifact serialization: deterministic JSON and CSV with 17 significant
digits, atomic writes and run-configuration parsing."""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .background import PeriodicBackground
from .errors import SchemaError
from .perturbed import Perturbation

SCHEMA_VERSION = "1.0"
DEFAULT_TOLERANCES = {"cluster_radius": 1e-7, "quadrature_tol": 1e-10, "lift_tol": 1e-6}


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}'
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with sorted keys and every float at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload, kind):
    """Write ``payload`` with ``schema_version`` and ``kind`` fields added."""
    doc = dict(payload)
    doc["schema_version"] = SCHEMA_VERSION
    doc["kind"] = kind
    atomic_write(path, dumps(doc))
    return doc


def write_csv(path, header, rows):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([format(float(v), ".17g") for v in row])
    atomic_write(path, buf.getvalue())


def read_json(path, kind=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    if kind is not None and doc.get("kind", kind) != kind:
        raise SchemaError(f"{path}: kind {doc.get('kind')!r}, expected {kind!r}")
    return doc


def require(doc, key, types, where="config"):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaError(f"{where}: field {key!r} has type {type(value).__name__}")
    return value


def _real_list(doc, key, where):
    values = require(doc, key, list, where)
    if not values or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise SchemaError(f"{where}: {key!r} must be a non-empty list of numbers")
    return [float(v) for v in values]


@dataclass
class RunConfig:
    background: PeriodicBackground
    perturbation: Perturbation = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    grid: int = 200
    seed: int = 0
    side: str = "right"
    draws: int = None

    def to_json(self):
        return {"background": self.background.to_json(),
                "perturbation": self.perturbation.to_json() if self.perturbation else None,
                "tolerances": self.tolerances, "grid": self.grid, "seed": self.seed, "side": self.side}


def parse_background(doc, where="background"):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be an object")
    a0 = _real_list(doc, "a0", where)
    b0 = _real_list(doc, "b0", where)
    if len(a0) != len(b0):
        raise SchemaError(f"{where}: a0 and b0 differ in length")
    try:
        return PeriodicBackground(tuple(a0), tuple(b0))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def parse_perturbation(doc, where="perturbation"):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be an object")
    u = _real_list(doc, "u", where)
    v = _real_list(doc, "v", where)
    if len(u) != len(v):
        raise SchemaError(f"{where}: u and v differ in length")
    if "p" in doc and doc["p"] != len(u) - 1:
        raise SchemaError(f"{where}: p={doc['p']} does not match {len(u)} coefficients")
    return Perturbation(tuple(u), tuple(v))


def load_config(path, need_perturbation=False):
    doc = read_json(path)
    bg = parse_background(require(doc, "background", dict))
    pert = None
    if doc.get("perturbation") is not None:
        pert = parse_perturbation(doc["perturbation"])
    elif need_perturbation:
        raise SchemaError("config: missing field 'perturbation'")
    tol = dict(DEFAULT_TOLERANCES)
    extra = doc.get("tolerances", {})
    if not isinstance(extra, dict):
        raise SchemaError("config: 'tolerances' must be an object")
    for k, v in extra.items():
        if k not in DEFAULT_TOLERANCES:
            raise SchemaError(f"config: unknown tolerance {k!r}")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise SchemaError(f"config: tolerance {k!r} must be a positive number")
        tol[k] = float(v)
    grid = doc.get("grid", 200)
    seed = doc.get("seed", 0)
    side = doc.get("side", "right")
    draws = doc.get("draws")
    if not isinstance(grid, int) or isinstance(grid, bool) or grid < 16:
        raise SchemaError("config: 'grid' must be an integer >= 16")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError("config: 'seed' must be an integer")
    if side not in ("right", "left"):
        raise SchemaError("config: 'side' must be 'right' or 'left'")
    if draws is not None and (not isinstance(draws, int) or isinstance(draws, bool) or draws < 0):
        raise SchemaError("config: 'draws' must be a non-negative integer")
    return RunConfig(bg, pert, tol, grid, seed, side, draws)
