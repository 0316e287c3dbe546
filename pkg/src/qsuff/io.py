"""JSON instance files and verdict reports."""

from __future__ import annotations

import hashlib
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .matcore import check_hermitian
from .measurements import Povm
from .ssa import TripartiteState
from .states import Ensemble, QuantumChannel, check_density


class InstanceError(ValueError):
    """Malformed or inconsistent instance document."""


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files("qsuff").joinpath("schema/instance.schema.json").read_text()
    return json.loads(text)


def encode_matrix(M) -> list:
    M = np.asarray(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(rows) -> np.ndarray:
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InstanceError("ragged matrix rows")
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def validate_document(doc) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        spath = "/".join(str(p) for p in err.absolute_schema_path)
        raise InstanceError(f"schema violation at {path} (schema path {spath}): {err.message}")


def _square(M, what):
    if M.shape[0] != M.shape[1]:
        raise InstanceError(f"{what} must be square, got {M.shape}")
    return M


def from_document(doc):
    """Validate a parsed JSON document and build the corresponding object.

    Returns a density matrix (ndarray), :class:`QuantumChannel`,
    :class:`TripartiteState`, :class:`Povm`, :class:`Ensemble` or an
    ``(A, B)`` tuple of Hermitian matrices.
    """
    validate_document(doc)
    kind = doc["kind"]
    try:
        if kind == "density":
            return check_density(_square(decode_matrix(doc["matrix"]), "matrix"))
        if kind == "channel":
            ks = [decode_matrix(k) for k in doc["kraus"]]
            for k in ks:
                if k.shape != (doc["out_dim"], doc["in_dim"]):
                    raise InstanceError(
                        f"Kraus operator shape {k.shape} disagrees with "
                        f"out_dim x in_dim = {doc['out_dim']} x {doc['in_dim']}")
            return QuantumChannel(tuple(ks))
        if kind == "tripartite":
            M = _square(decode_matrix(doc["matrix"]), "matrix")
            return TripartiteState(tuple(doc["dims"]), M)
        if kind == "povm":
            return Povm(tuple(_square(decode_matrix(E), "effect") for E in doc["effects"]))
        if kind == "ensemble":
            states = tuple(_square(decode_matrix(s), "state") for s in doc["states"])
            return Ensemble(np.array(doc["weights"], dtype=float), states)
        if kind == "hermitian_pair":
            A = check_hermitian(_square(decode_matrix(doc["A"]), "A"))
            B = check_hermitian(_square(decode_matrix(doc["B"]), "B"))
            if A.shape != B.shape:
                raise InstanceError("A and B have different dimensions")
            return A, B
    except InstanceError:
        raise
    except ValueError as exc:
        raise InstanceError(f"{kind}: {exc}") from exc
    raise InstanceError(f"unknown kind {kind!r}")


def to_document(obj, kind: str | None = None) -> dict:
    if isinstance(obj, QuantumChannel):
        return {"kind": "channel", "in_dim": obj.in_dim, "out_dim": obj.out_dim,
                "kraus": [encode_matrix(k) for k in obj.kraus]}
    if isinstance(obj, TripartiteState):
        return {"kind": "tripartite", "dims": list(obj.dims), "matrix": encode_matrix(obj.rho)}
    if isinstance(obj, Povm):
        return {"kind": "povm", "effects": [encode_matrix(E) for E in obj.effects]}
    if isinstance(obj, Ensemble):
        return {"kind": "ensemble", "weights": [float(w) for w in obj.weights],
                "states": [encode_matrix(s) for s in obj.states]}
    if isinstance(obj, tuple) and len(obj) == 2:
        return {"kind": "hermitian_pair", "A": encode_matrix(obj[0]), "B": encode_matrix(obj[1])}
    return {"kind": kind or "density", "matrix": encode_matrix(obj)}


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load(path):
    """Read, validate and decode an instance file; returns ``(object, document)``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                            f"{exc.msg}") from exc
    try:
        return from_document(doc), doc
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from exc


def digest(*docs) -> str:
    h = hashlib.sha256()
    for d in docs:
        h.update(canonical_json(d).encode())
        h.update(b"\n")
    return "sha256:" + h.hexdigest()


def jsonable(x):
    """Convert report values to JSON; infinities become the strings "+inf"/"-inf"."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


def verdict_report(check, docs, quantities, thresholds, verdict, runtime_ms, seed=None) -> dict:
    if verdict not in ("holds", "equality", "violation"):
        raise ValueError(f"bad verdict {verdict!r}")
    return jsonable({
        "check": check,
        "inputs_digest": digest(*docs),
        "quantities": quantities,
        "thresholds": thresholds,
        "verdict": verdict,
        "runtime_ms": runtime_ms,
        "seed": seed,
    })
