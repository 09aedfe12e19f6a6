import io
import json

import pytest

from qserre.cli import run_command
from qserre.model import load_bundled, dumps

from conftest import bundled_doc


def run(*argv, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_pages_table():
    code, out, _ = run("pages", "--input", "cp1", "--r", "2")
    assert code == 0
    assert out.startswith("E^2  p=-4..6  q=0..3")
    assert " q\\p  -4  -3  -2" in out
    assert "  (2,0)#0  a" in out
    assert "[a] (2,0) -> [u^2·b·e^{alpha}]" not in out or "d^2:" in out


def test_pages_marks_missing_guarantee():
    _, out, _ = run("pages", "--input", "cp1", "--r", "2")
    assert "no d∘d = 0 guarantee" in out
    _, out, _ = run("pages", "--input", "cp1", "--r", "1")
    assert "no d∘d = 0 guarantee" not in out


def test_pages_json_deterministic(monkeypatch):
    a = run("pages", "--input", "cp2", "--r", "2", "--format", "json")[1]
    monkeypatch.setenv("QSERRE_THREADS", "4")
    b = run("pages", "--input", "cp2", "--r", "2", "--format", "json")[1]
    assert a == b
    doc = json.loads(a)
    assert doc["command"] == "pages" and doc["schema_version"] == 1
    assert doc["model_hash"] == load_bundled("cp2").hash


def test_monodromy_witnesses():
    code, out, _ = run("monodromy", "--input", "cp1")
    assert code == 0
    assert "flag: true" in out
    assert "witness (a, a·e^{alpha})  (2, 0) -> (-2, 2)" in out
    assert run("monodromy", "--input", "cp1", "--expect-clean")[0] == 1
    assert run("monodromy", "--input", "cp2", "--expect-clean")[0] == 0


def test_dsq_expect_clean():
    assert run("dsq", "--input", "cp1", "--expect-clean")[0] == 1
    assert run("dsq", "--input", "cp2", "--expect-clean")[0] == 0


def test_oracle_seed42():
    code, out, _ = run("oracle", "--input", "random_seed42")
    assert code == 0
    assert "result: pass" in out
    assert "   0  2/2  0/0  1/1" in out


def test_oracle_refuses_truncated():
    code, _, err = run("oracle", "--input", "cp1")
    assert code == 2
    assert err.startswith("error E303 NotExact:")


def test_build_morse_matches_golden():
    code, out, _ = run("build-morse", "--input", "s2_morse")
    assert code == 0
    assert out == dumps(bundled_doc("cp1"))


def test_build_morse_output_file(tmp_path):
    path = tmp_path / "m.json"
    assert run("build-morse", "--input", "cp2_morse", "--output", str(path))[0] == 0
    assert path.read_text() == dumps(bundled_doc("cp2"))


def test_seidel_elementary():
    code, out, _ = run("seidel", "--input", "fibration_elementary", "--format", "json")
    assert code == 0
    phi = json.loads(out)["phi"]
    assert phi["classes"] == ["x", "y"]


def test_orbit_criterion_modes():
    code, out, _ = run("orbit-criterion", "--input", "cp1", "--mode", "dsq")
    assert code == 0 and out.startswith("outcome: Satisfied")
    code, out, _ = run("orbit-criterion", "--input", "cp1", "--mode", "perfect",
                       "--x", "b", "--z", "a", "--lambda", "alpha", "--r", "2")
    assert code == 0 and out.startswith("outcome: Satisfied")
    code, out, _ = run("orbit-criterion", "--input", "cp2", "--mode", "dsq")
    assert code == 1 and "HypothesisFails(monodromy)" in out


def test_morphism_identity(tmp_path):
    m = tmp_path / "map.json"
    m.write_text(json.dumps({"kind": "identity"}))
    code, _, _ = run("morphism", "--input", "cp1", "--map", str(m), "--r", "2", "--expect-clean")
    assert code == 0


@pytest.mark.parametrize("argv,code_str", [
    (("pages", "--input", "cp1", "--r", "9"), "E301 PageOutOfRange"),
    (("pages", "--input", "cp1"), "E001 UsageError"),
    (("frobnicate",), "E001 UsageError"),
    (("pages", "--input", "no_such_model", "--r", "1"), "SchemaError"),
])
def test_errors_exit_2(argv, code_str):
    code, out, err = run(*argv)
    assert code == 2 and out == ""
    assert err.startswith("error ") and code_str in err


def test_error_json():
    code, out, err = run("pages", "--input", "cp1", "--r", "9", "--format", "json")
    assert code == 2
    payload = json.loads(out or err)
    assert payload["error"]["type"] == "PageOutOfRange"
    assert payload["error"]["details"] == {"r": 9}


def test_float_rejected(tmp_path):
    doc = bundled_doc("cp1")
    doc["novikov"]["rho"] = 1.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run("pages", "--input", str(path), "--r", "1")
    assert code == 2 and "novikov.rho" in err
