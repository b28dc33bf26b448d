import json

import pytest

from deleeuw.cli import main

SMALL = ["--samples", "4000", "--seed", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_list_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0 and "heisenberg3" in out
    path = tmp_path / "e.json"
    assert run(capsys, "catalog", "export", "sl2_adjoint", "--out", str(path))[0] == 0
    assert json.loads(path.read_text())["name"] == "sl2_adjoint"


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", "--entry", "tangent_sl2", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["type"] == "mixed" and rep["radical_dim"] == 3


def test_analyze_warns_non_unimodular(capsys, tmp_path):
    alg = tmp_path / "axb.json"
    alg.write_text(json.dumps({"dim": 2, "basis": ["a", "b"],
                               "brackets": [{"i": "a", "j": "b", "coeffs": {"b": 1.0}}]}))
    code, out, _ = run(capsys, "analyze", "--algebra", str(alg))
    assert code == 0
    assert "NotUnimodular" in out


def test_bound_from_files(capsys, tmp_path):
    alg = tmp_path / "heis.json"
    rep = tmp_path / "rep.json"
    alg.write_text(json.dumps({"dim": 3, "basis": ["X", "Y", "Z"],
                               "brackets": [{"i": "X", "j": "Y", "coeffs": {"Z": 1.0}}]}))
    rep.write_text(json.dumps({"generators": [{"label": "x", "x": [1, 0, 0], "t": 1.0},
                                              {"label": "y", "x": [0, 1, 0], "t": 1.0}]}))
    code, out, _ = run(capsys, "bound", "--algebra", str(alg), "--rep", str(rep), "--format", "json")
    assert code == 0
    assert json.loads(out)["value"] == 1.0


def test_bad_json_reports_position(capsys, tmp_path):
    alg = tmp_path / "bad.json"
    alg.write_text('{"dim": 2,\n "basis": [}')
    code, _, err = run(capsys, "analyze", "--algebra", str(alg))
    assert code == 2
    assert "bad.json:2:" in err


def test_bound_methods(capsys):
    code, out, _ = run(capsys, "bound", "--entry", "diag_r2", "--method", "character-shift", "--chi", "one",
                       "--format", "json")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.25)
    code, out, _ = run(capsys, "bound", "--entry", "tangent_sl2")
    assert code == 0 and "[OPEN-PROBLEM]" in out and "annotation" in out


def test_unknown_entry_exit_code(capsys):
    code, _, err = run(capsys, "bound", "--entry", "nope")
    assert code == 2 and "UnknownEntry" in err


def test_config_validation(capsys):
    assert run(capsys, "estimate", "--entry", "so3", "--family", "ball:r=1", "--samples", "10")[0] == 2
    assert run(capsys, "verify", "--entry", "so3", "--family", "ball:r=1", "--sigma", "9", *SMALL)[0] == 2


def test_estimate_and_verify(capsys):
    code, out, _ = run(capsys, "estimate", "--entry", "diag_r2", "--family", "box:w=1", *SMALL)
    assert code == 0
    code, out, _ = run(capsys, "verify", "--entry", "diag_r2", "--family", "box:w=1", *SMALL)
    assert code == 0 and out.startswith("PASS")


def test_verify_fails_on_inflated_certificate(capsys, tmp_path):
    cert = tmp_path / "c.json"
    cert.write_text(json.dumps({"rule": "TrivialBound", "value": 1.0, "metadata": {}, "children": []}))
    code, out, _ = run(capsys, "verify", "--entry", "sl2_adjoint", "--family", "ball:r=1", "--cert", str(cert),
                       *SMALL)
    assert code == 3 and "FAIL" in out


def test_sweep_csv_is_deterministic(capsys):
    argv = ["sweep", "--entry", "heisenberg3", "--axis", "eps", "--family", "split:eps=0.1",
            "--grid", "0.1,0.01", *SMALL]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0
    assert first == second
    assert first.splitlines()[0].startswith("family-parameter")
