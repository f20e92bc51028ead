"""JSON and CSV formats.

Schemas::

    configuration   {"k": 2, "m": 3, "rows": [[1, 2, 2], [2, 0, 0]]}
    Gram matrix     {"k": 2, "lower": [u11, u21, u22]}
    Euler angles    {"m": 3, "theta": [t1, t2]}
    angle schedule  {"k": 2, "m": 3, "theta": {"1,1": ..., "1,2": ..., "2,1": ...},
                     "reflection": false}
    rotation        row-major nested arrays

Floats are printed with 17 significant digits.  Non-finite floats are written
as ``null``.
"""

import csv
import io
import json
import math

import numpy as np

from .exceptions import DimensionMismatch, ValidationError
from .linalg import as_gram, as_vectors, n_packed, pack_lower, unpack_lower
from .reduction import AngleSchedule


class MalformedInput(ValidationError):
    code = "malformed_input"


def format_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps(obj, indent=None, _level=0):
    """Serialize to JSON, printing floats with 17 significant digits."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(key)) + ": " + dumps(value, indent, _level + 1)
                 for key, value in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep rows of numbers on one line
        inner = indent if any(isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj) else None
        if inner is None:
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[" + sep.join(pad + dumps(v, indent, _level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from exc


def _field(obj, name):
    if not isinstance(obj, dict) or name not in obj:
        raise MalformedInput(f"missing field {name!r}")
    return obj[name]


def vectors_to_json(V):
    V = as_vectors(V)
    return {"k": V.shape[0], "m": V.shape[1], "rows": V.tolist()}


def vectors_from_json(obj):
    k, m = int(_field(obj, "k")), int(_field(obj, "m"))
    try:
        V = np.array(_field(obj, "rows"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"rows are not a numeric matrix: {exc}") from exc
    if V.shape != (k, m):
        raise DimensionMismatch(f"rows have shape {V.shape}, expected ({k}, {m})", k=k, m=m)
    return as_vectors(V)


def gram_to_json(G):
    G = as_gram(G)
    return {"k": G.shape[0], "lower": pack_lower(G).tolist()}


def gram_from_json(obj):
    k = int(_field(obj, "k"))
    try:
        lower = np.array(_field(obj, "lower"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"lower is not a numeric array: {exc}") from exc
    if lower.ndim != 1 or lower.size != n_packed(k):
        raise DimensionMismatch(f"k={k} needs {n_packed(k)} packed entries, got {lower.size}",
                                k=k)
    return as_gram(unpack_lower(lower), k)


def angles_to_json(theta):
    theta = np.asarray(theta, dtype=float)
    return {"m": theta.size + 1, "theta": theta.tolist()}


def angles_from_json(obj):
    m = int(_field(obj, "m"))
    theta = np.array(_field(obj, "theta"), dtype=float).ravel()
    if theta.size != m - 1:
        raise DimensionMismatch(f"m={m} needs {m - 1} angles, got {theta.size}", m=m)
    return theta


def schedule_to_json(schedule):
    return {"k": schedule.k, "m": schedule.m,
            "theta": {f"{i},{p}": value for (i, p), value in schedule.theta.items()},
            "reflection": schedule.reflection}


def schedule_from_json(obj):
    theta = {}
    for key, value in _field(obj, "theta").items():
        try:
            i, p = (int(part) for part in key.split(","))
        except ValueError as exc:
            raise MalformedInput(f"bad schedule key {key!r}") from exc
        theta[(i, p)] = float(value)
    return AngleSchedule(int(_field(obj, "k")), int(_field(obj, "m")), theta,
                         bool(obj.get("reflection", False)))


def matrix_from_json(obj):
    if isinstance(obj, dict):
        obj = _field(obj, "matrix")
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"not a numeric matrix: {exc}") from exc
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch("expected a square matrix", shape=A.shape)
    return A


def density_to_json(d):
    return {"value": d.value, "log_value": d.log_value, "singular": d.singular}


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value) if math.isfinite(value) else str(float(value))
    return str(value)
