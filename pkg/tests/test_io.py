import json
import math

import numpy as np
import pytest

from qsuff.io import (
    InstanceError,
    canonical_json,
    decode_matrix,
    digest,
    encode_matrix,
    from_document,
    jsonable,
    load,
    to_document,
    validate_document,
)
from qsuff.measurements import random_povm
from qsuff.ssa import random_markov_classical
from qsuff.states import Ensemble, QuantumChannel, random_channel, random_density


def test_matrix_codec(rng):
    M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.array_equal(decode_matrix(encode_matrix(M)), M)


@pytest.mark.parametrize("make", [
    lambda r: random_density(3, r),
    lambda r: random_channel(3, 2, 2, r),
    lambda r: random_markov_classical((2, 3, 2), r),
    lambda r: random_povm(3, 4, r),
    lambda r: Ensemble(np.array([0.25, 0.75]), (random_density(2, r), random_density(2, r))),
    lambda r: (np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])),
])
def test_round_trip(rng, make):
    doc = to_document(make(rng))
    text = json.dumps(doc)
    back = to_document(from_document(json.loads(text)))
    assert canonical_json(back) == canonical_json(doc)


def test_schema_rejects_with_path():
    doc = {"kind": "density", "matrix": [[[1, 0], [0]], [[0, 0], [0, 0]]]}
    with pytest.raises(InstanceError, match="schema path"):
        validate_document(doc)
    with pytest.raises(InstanceError, match="kind"):
        validate_document({"kind": "banana"})


def test_inconsistent_dims():
    K = encode_matrix(np.eye(2))
    with pytest.raises(InstanceError):
        from_document({"kind": "channel", "in_dim": 3, "out_dim": 2, "kraus": [K]})
    with pytest.raises(InstanceError):
        from_document({"kind": "tripartite", "dims": [2, 2, 2], "matrix": encode_matrix(np.eye(4) / 4)})


def test_not_a_density():
    with pytest.raises(InstanceError):
        from_document({"kind": "density", "matrix": encode_matrix(np.eye(2))})


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InstanceError, match="invalid JSON"):
        load(bad)
    with pytest.raises(InstanceError, match="cannot read"):
        load(tmp_path / "missing.json")


def test_digest_stable(rng):
    d = to_document(random_density(2, rng))
    assert digest(d) == digest(json.loads(json.dumps(d)))
    assert digest(d).startswith("sha256:")


def test_jsonable_inf():
    out = jsonable({"a": math.inf, "b": np.float64(-np.inf), "c": np.array([1.0, 2.0]), "d": 1j})
    assert out == {"a": "+inf", "b": "-inf", "c": [1.0, 2.0], "d": [0.0, 1.0]}
