import json
import subprocess
import sys

import numpy as np
import pytest

from qsuff.cli import main
from qsuff.io import to_document
from qsuff.measurements import example1, random_povm
from qsuff.ssa import random_tripartite
from qsuff.states import Ensemble, depolarizing, random_channel, random_density


def write(path, obj):
    path.write_text(json.dumps(to_document(obj)))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(1)
    return {
        "D1": write(tmp_path / "d1.json", random_density(3, rng)),
        "D2": write(tmp_path / "d2.json", random_density(3, rng)),
        "T": write(tmp_path / "t.json", random_channel(3, 2, 3, rng)),
        "dep": write(tmp_path / "dep.json", depolarizing(3, 0.3)),
        "tri": write(tmp_path / "tri.json", random_tripartite((2, 2, 2), rng)),
        "E": write(tmp_path / "e.json", random_povm(3, 3, rng)),
        "E2": write(tmp_path / "e2.json", random_povm(2, 3, rng)),
        "ens": write(tmp_path / "ens.json", Ensemble(np.array([0.5, 0.5]),
                                                      (random_density(3, rng), random_density(3, rng)))),
        "pair": write(tmp_path / "pair.json", (np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0]))),
        "pure": write(tmp_path / "pure.json", np.diag([1.0, 0.0, 0.0])),
        "dir": tmp_path,
    }


def test_example1_equality(capsys):
    code, out, _ = run(capsys, "example1", "--mu", "0.2", "--x", "0.5", "--z", "0.1")
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "equality"
    assert rep["quantities"]["gap"] <= 1e-9
    assert rep["thresholds"]["gap"] == 1e-8


def test_example1_invalid(capsys):
    code, _, err = run(capsys, "example1", "--mu", "0.2", "--x", "0.5", "--z", "0.9")
    assert code == 1 and "x(1 - x)" in err


def test_entropy(capsys, files):
    code, out, _ = run(capsys, "entropy", "vn", files["D1"])
    assert code == 0 and json.loads(out)["quantities"]["entropy"] > 0
    code, out, _ = run(capsys, "entropy", "rel", files["D1"], files["D2"])
    assert code == 0 and json.loads(out)["quantities"]["relative_entropy"] > 0
    code, out, _ = run(capsys, "entropy", "alpha", "--alpha", "0.5", files["D1"], files["D2"])
    assert code == 0 and json.loads(out)["quantities"]["alpha_divergence"] > 0
    code, out, _ = run(capsys, "entropy", "rel", files["D1"], files["pure"])
    assert code == 0 and json.loads(out)["quantities"]["relative_entropy"] == "+inf"
    code, _, _ = run(capsys, "entropy", "alpha", files["D1"], files["D2"])
    assert code == 1


def test_channel(capsys, files, tmp_path):
    code, out, _ = run(capsys, "channel", "validate", files["T"])
    assert code == 0 and json.loads(out)["verdict"] == "holds"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "channel", "in_dim": 2, "out_dim": 2,
                               "kraus": [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]}))
    code, out, _ = run(capsys, "channel", "validate", str(bad))
    assert code == 1 and json.loads(out)["quantities"]["trace_preserving"] is False
    code, out, _ = run(capsys, "channel", "apply", files["T"], files["D1"])
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "density" and len(doc["matrix"]) == 2


def test_monotonicity(capsys, files):
    code, out, _ = run(capsys, "monotonicity", "check", files["D1"], files["D2"], files["T"], "--replay")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "holds"
    assert rep["quantities"]["margin"] > 0
    assert rep["quantities"]["replay"]["quadrature_error"] < 1e-7


def test_monotonicity_regularize(capsys, files):
    code, _, err = run(capsys, "monotonicity", "check", files["pure"], files["D2"], files["dep"], "--replay")
    assert code == 1 and "--regularize" in err
    code, out, _ = run(capsys, "monotonicity", "check", files["pure"], files["D2"], files["dep"],
                       "--replay", "--regularize", "1e-3")
    rep = json.loads(out)
    assert code == 0 and rep["quantities"]["regularized"] is True


def test_equality(capsys, files):
    code, out, _ = run(capsys, "equality", "theorem2", files["D1"], files["D2"], files["dep"],
                       "--t", "0.5,1.5")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "holds"
    assert set(rep["quantities"]["condition1_by_t"]) == {"0.5", "1.5"}


def test_ssa(capsys, files):
    code, out, _ = run(capsys, "ssa", "check", files["tri"])
    assert code == 0 and json.loads(out)["quantities"]["ssa_gap"] > 0
    code, out, _ = run(capsys, "ssa", "theorem3", files["tri"])
    assert code == 0 and json.loads(out)["verdict"] == "holds"
    code, out, _ = run(capsys, "ssa", "recover", files["tri"])
    assert code == 0 and json.loads(out)["quantities"]["dual_residual"] < 1e-9
    code, out, _ = run(capsys, "ssa", "recover", "--literal-E", files["tri"])
    assert code == 0 and json.loads(out)["quantities"]["unital_residual"] > 0.1


def test_markov_gen_round_trip(capsys, tmp_path):
    for flag in ("--classical", "--hamiltonian"):
        code, out, _ = run(capsys, "markov", "gen", "--dims", "2,3,2", "--seed", "4", flag)
        assert code == 0
        path = tmp_path / "m.json"
        path.write_text(out)
        code, rep, _ = run(capsys, "ssa", "theorem3", str(path))
        assert code == 0 and json.loads(rep)["verdict"] == "equality"
        from qsuff.io import canonical_json, load

        obj, doc = load(path)
        assert canonical_json(to_document(obj)) == canonical_json(json.loads(out))


def test_povm(capsys, files, tmp_path):
    D1, D2, E = example1(0.2, 0.5, 0.1)
    p = [write(tmp_path / f"{k}.json", v) for k, v in (("a", D1), ("b", D2), ("c", E))]
    code, out, _ = run(capsys, "povm", "posteriori", *p, "--diagnose")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "equality"
    assert rep["quantities"]["diagnostics"]["classes"] == [[0], [1, 2]]
    code, out, _ = run(capsys, "povm", "posteriori", files["D1"], files["D2"], files["E"])
    assert code == 0 and json.loads(out)["verdict"] == "holds"


def test_holevo(capsys, files, tmp_path):
    code, out, _ = run(capsys, "holevo", files["ens"], files["T"], files["E2"])
    rep = json.loads(out)
    assert code == 0 and rep["quantities"]["gap"] >= 0


def test_gt(capsys, files, tmp_path):
    csv = tmp_path / "scan.csv"
    code, out, _ = run(capsys, "gt", "check", files["pair"], "--grid", "0.5,1,2", "--csv", str(csv))
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "holds"
    assert abs(rep["quantities"]["gap"] - 0.40582857786649) < 1e-12
    assert csv.read_text().startswith("p,value\n")


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "density", "matrix": [[1, 0], [0, 1]]}))
    code, _, err = run(capsys, "entropy", "vn", str(bad))
    assert code == 1
    assert "schema path" in err and "matrix" in err
    bad.write_text("[1, 2")
    code, _, err = run(capsys, "entropy", "vn", str(bad))
    assert code == 1 and "invalid JSON" in err


def test_wrong_kind(capsys, files):
    code, _, err = run(capsys, "entropy", "vn", files["T"])
    assert code == 1 and "expected a 'density'" in err


def test_usage_error(capsys):
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "campaign", "--check", "monotonicity", "--dims", "6..2")[0] == 1


def test_no_runtime_reproducible(capsys, files):
    a = run(capsys, "ssa", "check", files["tri"], "--no-runtime")[1]
    b = run(capsys, "ssa", "check", files["tri"], "--no-runtime")[1]
    assert a == b and json.loads(a)["runtime_ms"] is None


def test_campaign_deterministic(capsys):
    args = ("campaign", "--check", "monotonicity", "--n", "1000", "--seed", "7")
    code1, out1, err1 = run(capsys, *args)
    code2, out2, _ = run(capsys, *args, "--threads", "4")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "runtime_ms" in err1
    assert json.loads(out1)["violations"] == 0


def test_console_script(files):
    proc = subprocess.run([sys.executable, "-m", "qsuff.cli", "gt", "check", files["pair"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["check"] == "gt"
