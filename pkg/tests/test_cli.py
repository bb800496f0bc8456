from __future__ import annotations

import json
import subprocess
import sys
from io import StringIO

import pytest

from skewcfc.blocks import h2_power, materialize, parse_spec
from skewcfc.cli import EXIT_INPUT, EXIT_NO, EXIT_OK, EXIT_UNKNOWN, run
from skewcfc.exact import Matrix, matrix_from_json, matrix_to_json
from skewcfc.planner import verify


def _run(*argv: str) -> tuple[int, str, str]:
    out, err = StringIO(), StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def _json(*argv: str) -> tuple[int, dict]:
    code, out, _ = _run(*argv, "--json")
    return code, json.loads(out)


def _dump(path, m: Matrix) -> str:
    path.write_text(json.dumps(matrix_to_json(m)))
    return str(path)


def test_rho():
    code, out, _ = _run("rho", "G3")
    assert code == EXIT_OK and out.strip() == "3/4"


def test_census():
    code, env = _json("census", "J1 + J3 + G2 + H2(-1)")
    assert code == EXIT_OK
    r = env["result"]
    assert r["rank_a_plus_at"]["formula"] == r["rank_a_plus_at"]["computed"] == 3
    assert r["census"]["j1"] == 1 and r["rho"] == "11/4"


@pytest.mark.parametrize("argv, code", [
    (("decide", "G2*4", "--m", "3"), EXIT_NO),
    (("decide", "J1*5", "--m", "0"), EXIT_OK),
    (("decide", "J3", "--rank-b", "2"), EXIT_OK),
    (("decide", "J3", "--m", "2"), EXIT_NO),
    (("decide", "G2 + G2 + J2", "--m", "2"), EXIT_UNKNOWN),
    (("decide", "J3", "--rank-b", "3"), EXIT_INPUT),
    (("decide", "J3"), EXIT_INPUT),
    (("decide", "J3", "--m", "-1"), EXIT_INPUT),
    (("rho", "J3 + X2"), EXIT_INPUT),
    (("rho", "H4(-1)"), EXIT_INPUT),
    (("frobnicate",), EXIT_INPUT),
])
def test_exit_codes(argv, code):
    assert _run(*argv)[0] == code


def test_parse_error_reports_position():
    code, env = _json("rho", "J3 + X2")
    assert code == EXIT_INPUT and env["status"] == "error"
    assert env["error"]["type"] == "SpecParseError" and env["error"]["position"] == 5
    code, out, err = _run("rho", "J3 + X2")
    assert out == "" and err.startswith("error:")


def test_verify_j3(tmp_path):
    x = _dump(tmp_path / "x.json", Matrix.from_rows([[1, 0], [0, 1], [-1, 0]]))
    b = _dump(tmp_path / "b.json", materialize(h2_power(1)))
    assert _run("verify", "J3", "--x", x, "--b", b)[0] == EXIT_OK
    bad = _dump(tmp_path / "bad.json", Matrix.from_rows([[1, 0], [0, 1], [1, 0]]))
    assert _run("verify", "J3", "--x", bad, "--b", b)[0] == EXIT_NO
    a = _dump(tmp_path / "a.json", materialize(parse_spec("J3")))
    assert _run("verify", "--a", a, "--x", x, "--b", b)[0] == EXIT_OK
    assert _run("verify", "J3", "--a", a, "--x", x, "--b", b)[0] == EXIT_INPUT


def test_verify_missing_file(tmp_path):
    code, env = _json("verify", "J3", "--x", str(tmp_path / "nope.json"), "--b", str(tmp_path / "nope.json"))
    assert code == EXIT_INPUT and env["error"]["type"] == "UsageError"


def test_solve_then_verify(tmp_path):
    xp, cp, bp = tmp_path / "x.json", tmp_path / "cert.json", tmp_path / "b.json"
    spec = "J5 + G4 + H6(2)"
    code, _, _ = _run("solve", spec, "--m", "4", "--out", str(xp), "--cert", str(cp))
    assert code == EXIT_OK
    _dump(bp, materialize(h2_power(4)))
    assert _run("verify", spec, "--x", str(xp), "--b", str(bp))[0] == EXIT_OK
    cert = json.loads(cp.read_text())
    assert cert["source"] == spec and cert["target"] == "H2(-1)*4"
    assert matrix_from_json(cert["solution"]) == matrix_from_json(json.loads(xp.read_text()))
    assert all({"law", "paper_ref", "lhs", "rhs", "witness"} <= set(s) for s in cert["steps"])


def test_solve_inconsistent_exit():
    code, env = _json("solve", "G2*4", "--m", "3")
    assert code == EXIT_NO and env["result"]["verdict"] == "inconsistent"


def test_decide_writes_certificate(tmp_path):
    cp = tmp_path / "c.json"
    assert _run("decide", "G2 + H4(2)", "--m", "1", "--cert", str(cp))[0] == EXIT_OK
    assert json.loads(cp.read_text())["target"] == "H2(-1)"


def test_solve_b(tmp_path):
    b = Matrix.from_rows([[0, 2, 0], [-2, 0, 1], [0, -1, 0]])
    bp, xp = _dump(tmp_path / "b.json", b), tmp_path / "x.json"
    code, _, _ = _run("solve-b", "J3 + J3", "--b", bp, "--out", str(xp))
    assert code == EXIT_OK
    x = matrix_from_json(json.loads(xp.read_text()))
    assert verify(parse_spec("J3 + J3"), x, b)
    assert _run("solve-b", "G1*3", "--b", bp)[0] == EXIT_NO
    sym = _dump(tmp_path / "s.json", Matrix.from_rows([[0, 1], [1, 0]]))
    assert _run("solve-b", "J3", "--b", sym)[0] == EXIT_INPUT


def test_max_rank():
    code, env = _json("max-rank", "J5 + J6")
    assert code == EXIT_OK and env["result"]["value"] == 6
    code, env = _json("max-rank", "G2 + G2 + J2")
    assert code == EXIT_UNKNOWN and env["result"]["value"] is None
    assert env["result"]["lower"] < env["result"]["upper"]


def test_json_is_byte_stable(tmp_path):
    for argv in (("solve", "J5 + G4 + H6(2)", "--m", "4"), ("census", "G6 + H4(1/2+i)"), ("rho", "J")):
        first, second = _run(*argv, "--json")[1], _run(*argv, "--json")[1]
        assert first == second
        env = json.loads(first)
        assert set(env) in ({"verb", "status", "exit_code", "result"}, {"verb", "status", "exit_code", "error"})


def test_status_matches_exit_code():
    status = {EXIT_OK: "ok", EXIT_NO: "no", EXIT_UNKNOWN: "unknown", EXIT_INPUT: "error"}
    for argv in (("decide", "J3", "--m", "1"), ("decide", "J3", "--m", "2"),
                 ("decide", "G2 + G2 + J2", "--m", "2"), ("decide", "J3", "--rank-b", "1")):
        code, env = _json(*argv)
        assert env["exit_code"] == code and env["status"] == status[code]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "skewcfc", "rho", "G2*4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "3"
