import json
import subprocess
import sys

import pytest

from pellconcat import cli
from pellconcat.search import Check, VerificationReport


def run(*args, env=None):
    import os
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "pellconcat", *args], capture_output=True,
                          text=True, env=e, timeout=600)


@pytest.mark.parametrize("args", [
    ["bounds", "--equation", "3"],
    ["bounds", "--base", "1"],
    ["bounds", "--base", "3", "--base-min", "2"],
    ["cf", "--base", "2"],
    ["cf", "--base", "2", "--terms", "3", "--until-q", "10"],
    ["cf", "--base", "2", "--until-q", "abc"],
    ["solve", "--format", "yaml"],
    ["nonsense"],
])
def test_usage_errors_exit_2(args):
    with pytest.raises(SystemExit) as info:
        cli.main(args)
    assert info.value.code == 2


def test_bad_precision_env_is_usage_error(monkeypatch):
    monkeypatch.setenv("PELLCONCAT_PRECISION_MAX", "many")
    with pytest.raises(SystemExit) as info:
        cli.main(["cf", "--base", "2", "--terms", "5"])
    assert info.value.code == 2


def test_precision_exhaustion_exit_3():
    r = run("cf", "--base", "3", "--terms", "200", env={"PELLCONCAT_PRECISION_MAX": "64"})
    assert r.returncode == 3 and "precision" in r.stderr


def test_cf_json_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["cf", "--base", "2", "--until-q", "1e30", "--out", str(a)]) == 0
    assert cli.main(["cf", "--base", "2", "--until-q", "1e30", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["terms"] == 59
    assert int(data["convergents"][-1]["q"]) > 10 ** 30
    assert all(isinstance(x, str) for x in data["partial_quotients"])


def test_cf_csv_and_text(capsys):
    cli.main(["cf", "--base", "10", "--terms", "4", "--format", "csv"])
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "t,ref_index,a,p,q" and len(out) == 5
    cli.main(["cf", "--base", "10", "--terms", "2", "--format", "text"])
    assert capsys.readouterr().out.startswith("t=0 a=2")


def test_bounds_json(capsys):
    assert cli.main(["bounds", "--equation", "1", "--base", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    (rep,) = data["reports"]
    assert rep["equation"] == 1 and rep["b"] == 2
    stages = {s["label"]: s for s in rep["stages"]}
    assert stages["lambda1_matveev"]["within_reference"] is True
    assert "upper_bound" in rep["n_bound"]


def test_bounds_csv_covers_all_bases(capsys):
    cli.main(["bounds", "--format", "csv", "--base-min", "2", "--base-max", "4"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "equation,b,stage,upper_bound,reference,within_reference"
    assert {tuple(l.split(",")[:2]) for l in lines[1:]} == {(e, b) for e in "12" for b in "234"}


def test_verify_exit_codes(monkeypatch, capsys):
    good = VerificationReport([Check("t", "r", 2, "1", "1", "MATCH")])
    bad = VerificationReport([Check("t", "r", 2, "1", "2", "MISMATCH")])
    allowed = VerificationReport([Check("eq2_phase2", "q_index", 2, "1", "2", "MISMATCH")])
    info = VerificationReport([Check("eq1_phase2", "m", 2, "1", "2", "MISMATCH", binding=False)])
    for rep, code in ((good, 0), (bad, 5), (allowed, 0), (info, 0)):
        monkeypatch.setattr(cli, "verify_paper_tables", lambda *a, rep=rep, **k: rep)
        assert cli.main(["verify"]) == code
        out = json.loads(capsys.readouterr().out)
        assert out["ok"] is (code == 0)


def test_certificate_failure_exit_4(monkeypatch):
    from pellconcat.search import CertificateFailure

    def boom(*a, **k):
        raise CertificateFailure("no eps")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert cli.main(["solve", "--equation", "1", "--base", "2"]) == 4


@pytest.mark.slow
def test_solve_equation2_base5(tmp_path):
    out = tmp_path / "s.json"
    r = run("solve", "--equation", "2", "--base", "5", "--out", str(out))
    assert r.returncode == 0, r.stderr
    data = json.loads(out.read_text())
    got = [(s["b"], s["n"], s["m"], s["k"]) for s in data["solutions"]]
    assert got == [(5, 4, 0, 2), (5, 4, 1, 2), (5, 6, 3, 0)]
    assert data["solutions"][0] == {"equation": 2, "b": 5, "d": 1, "n": 4, "m": 0, "k": 2,
                                    "lhs": "12", "term1": "10", "term2": "2"}
    assert data["reports"][0]["complete"] is True
