import json
from importlib import resources

import jsonschema
import pytest

from zrp.cli import dumps, parse_matrix, run
from zrp.errors import ValidationError


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(resources.files("zrp").joinpath("schemas", f"{name}.schema.json").read_text())


def check(capsys, name, *argv):
    code, out, err = call(capsys, name, *argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, schema(name))
    assert doc["manifest"]["command"] == name
    return doc


def test_msol(capsys):
    doc = check(capsys, "msol", "--index", "2")
    assert doc["result"]["terms"] == [{"coeff": 0.5, "power": 0, "rate": 1}]
    assert doc["result"]["quasi_jump"]["value"] == [-1, 0]
    doc = check(capsys, "msol", "--index", "4")
    assert [t["coeff"] for t in doc["result"]["terms"]] == [0.25, 0.25]


def test_spectrum_delta(capsys):
    doc = check(capsys, "spectrum", "--family", "l2", "--B", "[[-2,0],[0,0]]", "--emin", "-3", "--emax", "0.99", "--step", "0.01")
    assert doc["result"]["eigenvalues"] == [pytest.approx(0.0, abs=1e-12)]
    assert "timings" not in doc["manifest"]


def test_spectrum_other_families(capsys):
    doc = check(capsys, "spectrum", "--family", "3d", "--B", "[[2]]", "--mu", "1")
    assert doc["result"]["eigenvalues"] == [0.75]
    doc = check(capsys, "spectrum", "--family", "sobolev", "--p", "2", "--B", "[[-2,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]",
                "--emin", "-5", "--emax", "0.99", "--step", "0.02")
    assert len(doc["result"]["eigenvalues"]) == 1
    doc = check(capsys, "spectrum", "--family", "nonlocal", "--B", "[[-1,0],[0,0]]", "--emin", "-5", "--step", "0.02")
    assert doc["result"]["eigenvalues"] == [pytest.approx(0.75)]


def test_spectrum_csv(capsys):
    code, out, _ = call(capsys, "spectrum", "--family", "3d", "--B", "[[-1]]", "--csv")
    assert code == 0
    assert out.splitlines() == ["index,E,residual,tangent_root", "0,-3,0,false"]


def test_complex_entries_and_hermiticity_message(capsys):
    code, _, err = call(capsys, "spectrum", "--family", "l2", "--B", "[[0,[1,1]],[[1,1],0]]")
    assert code == 2 and "(0,1)" in err and "Hermitian" in err
    code, out, _ = call(capsys, "spectrum", "--family", "l2", "--B", "[[-1,[0,0.5]],[[0,-0.5],0]]", "--emin", "-5")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["msol", "--index", "0"],
        ["spectrum", "--family", "l2", "--B", "[[1,2]]"],
        ["spectrum", "--family", "l2", "--B", "not json"],
        ["spectrum", "--family", "l2", "--B", "[[-2,0],[0,0]]", "--emax", "1.5"],
        ["spectrum", "--family", "sobolev", "--B", "[[0]]"],
        ["admissible", "--B", "[[1]]", "--gram", "[[1,2]]", "--dim", "1"],
        ["invert", "--family", "sobolev"],
        ["oracle-compare", "--family", "l2-delta", "--B", "[[0,0],[0,1]]"],
        ["nosuchcommand"],
        ["spectrum", "--family", "l2"],
    ],
)
def test_validation_exit_code(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_green_check(capsys):
    for fam, extra in (("l2", []), ("powers", ["--p", "2"]), ("sobolev", ["--p", "2"])):
        doc = check(capsys, "green-check", "--family", fam, "--trials", "10", "--seed", "3", *extra)
        assert doc["result"]["pass"] and doc["manifest"]["seed"] == 3


def test_admissible(capsys):
    doc = check(capsys, "admissible", "--B", "[[0.5]]", "--R", "[[0]]", "--gram", "[[2]]")
    assert doc["result"]["admissible"] is False and doc["result"]["witness_residual"] == 0
    doc = check(capsys, "admissible", "--B", "[[1]]", "--R", "[[0]]", "--gram", "[[2]]")
    assert doc["result"]["admissible"] is True and doc["result"]["witness"] is None


def test_invert(capsys):
    doc = check(capsys, "invert", "--family", "l2")
    assert doc["result"]["coefficient_matrix"] == [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    doc = check(capsys, "invert", "--family", "sobolev", "--p", "2")
    assert len(doc["result"]["psi"]) == 4


def test_oracle_compare(capsys):
    doc = check(capsys, "oracle-compare", "--family", "l2-delta", "--B", "[[-2,0],[0,0]]", "--L", "20", "--h", "0.01", "--k", "3")
    r = doc["result"]
    assert len(r["oracle"]) == 3 and len(r["analytic"]) == 1 and abs(r["diffs"][0]) < 1e-3
    doc = check(capsys, "oracle-compare", "--family", "nonlocal", "--B", "[[-1,0],[0,0]]", "--h", "0.05", "--L", "15", "--k", "2")
    assert abs(doc["result"]["diffs"][0]) < 1e-3


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scan": {"emin": -1.0, "emax": 0.5, "step": 0.05}}))
    doc = check(capsys, "spectrum", "--family", "l2", "--B", "[[-2,0],[0,0]]", "--config", str(cfg))
    assert doc["result"]["scan"]["E_min"] == -1 and doc["result"]["scan"]["step"] == 0.05
    doc2 = check(capsys, "spectrum", "--family", "l2", "--B", "[[-2,0],[0,0]]", "--config", str(cfg), "--emin", "-2")
    assert doc2["result"]["scan"]["E_min"] == -2
    assert doc["manifest"]["config_digest"] != doc2["manifest"]["config_digest"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    code, _, err = call(capsys, "msol", "--index", "2", "--config", str(bad))
    assert code == 2 and "nope" in err


def test_timings_only_on_request(capsys):
    doc = check(capsys, "msol", "--index", "2", "--timings")
    assert "total_s" in doc["manifest"]["timings"]


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("ZRP_THREADS", "0")
    code, _, err = call(capsys, "msol", "--index", "2")
    assert code == 2 and "ZRP_THREADS" in err


def test_selftest_deterministic_across_thread_caps(capsys, monkeypatch):
    monkeypatch.setenv("ZRP_THREADS", "1")
    code, a, _ = call(capsys, "selftest", "--seed", "3")
    monkeypatch.setenv("ZRP_THREADS", "4")
    code2, b, _ = call(capsys, "selftest", "--seed", "3")
    assert code == code2 == 0 and a == b
    jsonschema.validate(json.loads(a), schema("selftest"))


def test_dumps_format():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps([1.0, -0.0, 2]) == "[1, 0, 2]"
    assert dumps({"a": 1j}) == '{\n  "a": [0, 1]\n}'
    with pytest.raises(Exception):
        dumps(float("nan"))


def test_parse_matrix():
    M = parse_matrix("[[1, [0, 2]], [[0, -2], 3]]", "B")
    assert M[0, 1] == 2j and M[1, 0] == -2j
    assert parse_matrix("2.5", "b").shape == (1, 1)
    with pytest.raises(ValidationError, match=r"\(0,1\)"):
        parse_matrix('[[1, "x"], [0, 1]]', "B")
