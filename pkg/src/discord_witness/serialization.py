"""JSON state files and report encoding with 17 significant digits."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math

import numpy as np

from .errors import ParseError, ValidationError
from .qnum import BipartiteState, Tolerances, as_matrix, validate_state


def _number(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot encode non-finite number {x!r}")
    if x == int(x) and abs(x) < 2**53:
        return f"{x:.1f}"
    return format(x, ".17g")


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj, indent: int | None = 2, _level: int = 0) -> str:
    """Serialize ``obj`` to JSON, writing every float with 17 significant digits."""
    obj = _plain(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _number(obj)
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag}, None)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    try:
        return as_matrix([[complex(e["re"], e["im"]) for e in row] for row in rows])
    except (TypeError, KeyError) as exc:
        raise ParseError(f"malformed matrix entry: {exc}") from exc
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def state_to_json(state: BipartiteState) -> str:
    body = {"dims": [state.dA, state.dB], "matrix": matrix_to_json(state.rho)}
    return dumps(body, indent=None) + "\n"


def loads_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def state_from_json(text: str, tol: Tolerances | None = None) -> BipartiteState:
    doc = loads_json(text)
    if not isinstance(doc, dict) or set(doc) != {"dims", "matrix"}:
        raise ParseError('state file must be an object with exactly "dims" and "matrix"')
    dims = doc["dims"]
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) for d in dims)):
        raise ParseError('"dims" must be a list of two integers')
    return validate_state(matrix_from_json(doc["matrix"]), dims[0], dims[1], tol)


def read_state(path, tol: Tolerances | None = None) -> BipartiteState:
    with open(path, encoding="utf-8") as fh:
        return state_from_json(fh.read(), tol)


def write_state(state: BipartiteState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(state))


def fingerprint(state: BipartiteState) -> str:
    """sha256 of the canonical state-file encoding."""
    return hashlib.sha256(state_to_json(state).encode()).hexdigest()
