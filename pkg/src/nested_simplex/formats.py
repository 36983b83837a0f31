"""JSON query/state documents and CSV writers used by the command line.

The schemas here are mirrored in docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import InvalidInputError
from .nesting import DEFAULT_TOL, NestingQuery
from .steering import Ellipsoid, SteeredOutcome
from .two_qubit import CanonicalParams, TwoQubitState, assemble_canonical

SYMMETRY_TOL = 1e-10
TRACE_TOL = 1e-10
FLOAT_FORMAT = ".17g"
STEER_HEADER = ("x", "y", "z", "p")

_number = {"type": "number"}
_vec3 = {"type": "array", "items": _number, "minItems": 3, "maxItems": 3}
_mat3 = {"type": "array", "items": _vec3, "minItems": 3, "maxItems": 3}
_cplx = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_row4 = {"type": "array", "items": _cplx, "minItems": 4, "maxItems": 4}

QUERY_SCHEMA = {
    "type": "object",
    "required": ["R"],
    "properties": {
        "R": _number,
        "Q": _mat3,
        "c": _vec3,
        "r": {"type": "number", "minimum": 0},
        "d": {"oneOf": [_number, _vec3]},
        "shape": {"enum": ["sphere", "circle"]},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
    "oneOf": [{"required": ["Q", "c"]}, {"required": ["r", "d"]}],
}

STATE_SCHEMA = {
    "type": "object",
    "properties": {
        "rho": {"type": "array", "items": _row4, "minItems": 4, "maxItems": 4},
        "d": _vec3,
        "S": _mat3,
    },
    "oneOf": [{"required": ["rho"]}, {"required": ["d", "S"]}],
}


def _validate(doc: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInputError(f"{what}: field {where}: {exc.message}") from None


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc.msg}, line {exc.lineno})") from None


@dataclass(frozen=True)
class QueryFile:
    query: NestingQuery
    tol: float = DEFAULT_TOL

    def to_dict(self) -> dict:
        e = self.query.ellipsoid
        return {"R": self.query.big_radius, "Q": e.q.tolist(), "c": e.c.tolist(), "tol": self.tol}


def query_from_dict(doc: Any) -> QueryFile:
    _validate(doc, QUERY_SCHEMA, "query")
    R = float(doc["R"])
    if not R > 0:
        raise InvalidInputError("query: field R: must be positive")
    tol = float(doc.get("tol", DEFAULT_TOL))
    if "Q" in doc:
        if "shape" in doc:
            raise InvalidInputError("query: field shape: only valid with the r/d shorthand")
        Q = np.array(doc["Q"], dtype=float)
        asym = float(np.max(np.abs(Q - Q.T)))
        if asym > SYMMETRY_TOL:
            raise InvalidInputError(f"query: field Q: not symmetric (max |Q - Q^T| = {asym:.3g})")
        c = np.array(doc["c"], dtype=float)
    else:
        r = float(doc["r"])
        shape = doc.get("shape", "sphere")
        d = doc["d"]
        if isinstance(d, list):
            c = np.array(d, dtype=float)
        else:
            c = np.array([float(d), 0.0, 0.0])
        if shape == "sphere":
            Q = r * r * np.eye(3)
        else:
            if c[2] != 0:
                raise InvalidInputError("query: field d: a circle lies in the xy-plane, so d_z must be 0")
            Q = np.diag([r * r, r * r, 0.0])
    try:
        e = Ellipsoid(q=Q, c=c)
    except InvalidInputError as exc:
        raise InvalidInputError(f"query: field Q: {exc}") from None
    return QueryFile(NestingQuery(e, R), tol)


def load_query(path) -> QueryFile:
    return query_from_dict(_read_json(path))


@dataclass(frozen=True)
class StateFile:
    state: TwoQubitState
    params: CanonicalParams | None  # present when given in shorthand form


def state_from_dict(doc: Any) -> StateFile:
    _validate(doc, STATE_SCHEMA, "state")
    if "rho" in doc:
        arr = np.array(doc["rho"], dtype=float)
        rho = arr[..., 0] + 1j * arr[..., 1]
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            raise InvalidInputError(f"state: field rho: trace {tr.real:.12g} is not 1")
        try:
            return StateFile(TwoQubitState(rho / tr.real), None)
        except InvalidInputError as exc:
            raise InvalidInputError(f"state: field rho: {exc}") from None
    params = CanonicalParams(d=np.array(doc["d"], dtype=float), S=np.array(doc["S"], dtype=float))
    return StateFile(assemble_canonical(params), params)


def load_state(path) -> StateFile:
    return state_from_dict(_read_json(path))


def rho_to_json(rho) -> list:
    rho = np.asarray(rho, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in rho]


def json_safe(obj: Any) -> Any:
    """Recursively replace non-finite floats by None and numpy scalars/arrays by Python values."""
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_safe(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(json_safe(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


def steer_csv(outcomes: list[SteeredOutcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEER_HEADER)
    for o in outcomes:
        x, y, z = o.alice_bloch
        w.writerow([fmt(x), fmt(y), fmt(z), fmt(o.probability)])
    return buf.getvalue()


def table_csv(comments: list[str], header: list[str], rows: list[list[float]]) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc.strerror}") from None
