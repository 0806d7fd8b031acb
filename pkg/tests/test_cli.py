import csv
import io
import json
from pathlib import Path

import httpx
import pytest
from fastapi.testclient import TestClient

from expflow.api import dispatch
from expflow.cli import EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN, run
from expflow.service import app

DATA = Path(__file__).parent / "data"
GOLDEN = ["--lengths", "3/2-1/2*sqrt(5)", "3/2-1/2*sqrt(5)", "sqrt(5)-2", "--perm", "3", "2", "1"]
GOLDEN_IEM = {"lengths": GOLDEN[1:4], "permutation": [3, 2, 1], "normalize": False}


def cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_iem_check_matches_library():
    code, text = cli("iem", "check", *GOLDEN, "--budget", "500")
    assert code == EXIT_OK
    assert json.loads(text) == dispatch("iem/check", {"iem": GOLDEN_IEM, "budget": 500})


def test_iem_orbit_and_separate():
    code, text = cli("iem", "orbit", *GOLDEN, "--x", "1/7", "--steps", "4")
    assert code == EXIT_OK and len(json.loads(text)["points"]) == 5
    code, text = cli("iem", "separate", *GOLDEN, "--x", "1/7", "--y", "1007/7000",
                     "--delta", "3/100")
    assert code == EXIT_OK and json.loads(text)["separated"]


def test_rational_iem_file(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"iem": {"lengths": ["1/3", "2/3"], "permutation": [2, 1]}}))
    code, text = cli("iem", "check", "--iem-file", str(p))
    assert code == EXIT_OK and json.loads(text)["expansive"] == "No"


def test_surgery_script_bitorus():
    code, text = cli("surgery", "exec", str(DATA / "bitorus.json"))
    assert code == EXIT_OK
    [comp] = json.loads(text)["results"][-1]["decision"]
    assert comp["signature"] == [2, 0, 0] and comp["singular_indices"] == [-1, -1]
    cert = comp["certificate"]
    assert cert["verdict"] == "Yes" and cert["conditional"]


def test_surface_admit():
    code, text = cli("surface", "admit", "--h", "1")
    assert code == EXIT_OK and json.loads(text)["admits"] is False
    code, text = cli("surface", "admit", "--h", "1", "--b", "1")
    assert json.loads(text)["admits"] is True


def test_billiard_unfold_and_trace():
    code, text = cli("billiard", "unfold", "--angles", "1/2", "1/8", "3/8")
    body = json.loads(text)
    assert code == EXIT_OK and body["unfolding"]["chi"] == -2 and not body["torus"]
    code, text = cli("billiard", "trace", "--angles", "1/2", "1/2", "1/2", "1/2",
                     "--direction", "1", "0", "--start", "1/2", "1/2")
    assert code == EXIT_OK and json.loads(text)["period"] == 2


def test_unknown_exits_2():
    code, text = cli("billiard", "verdict", "--angles", "1/2", "1/8", "3/8",
                     "--direction", "4", "1+2*sqrt(2)")
    assert code == EXIT_UNKNOWN and json.loads(text)["expansive"] == "Unknown"


@pytest.mark.parametrize("argv", [
    ["iem", "check", "--lengths", "1/2", "1/3", "--perm", "2", "1"],
    ["iem", "check"],
    ["billiard", "trace", "--angles", "1/2", "1/4", "1/4", "--direction", "1", "0"],
    ["billiard", "unfold", "--angles", "0.5", "0.25", "0.25"],
    ["nonsense"],
])
def test_bad_input_exits_1(argv, capsys):
    try:
        code = run(argv, io.StringIO())
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_bad_json_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('[\n  {"op": "piece",}\n]')
    assert run(["surgery", "exec", str(p)], io.StringIO()) == EXIT_INPUT
    assert f"{p}:2:" in capsys.readouterr().err


def test_svg_output(tmp_path):
    out = tmp_path / "s.svg"
    assert run(["--format", "svg", "-o", str(out), "suspend", *GOLDEN]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("<svg") and 'viewBox="0 0 400 400"' in text
    code, text = cli("--format", "svg", "billiard", "trace", "--angles", "1/2", "1/8", "3/8",
                     "--direction", "1", "1+2*sqrt(2)", "--start", "1/3", "0", "--budget", "50")
    assert code == EXIT_OK and "<polyline" in text


def test_csv_pairtest():
    code, text = cli("--format", "csv", "flow", "pairtest", *GOLDEN, "--delta", "1/50",
                     "--pairs", "5", "--horizon", "20000")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 5
    for r in rows:
        assert r["separated"] == r["iem_separated"] == "True"
        assert r["n"] == r["iem_n"]


@pytest.fixture
def served(monkeypatch):
    client = TestClient(app)

    def post(url, json=None, timeout=None):
        return client.post(httpx.URL(url).path, json=json)
    monkeypatch.setattr(httpx, "post", post)


def test_server_mode_matches_in_process(served):
    local = cli("iem", "check", *GOLDEN, "--budget", "500")
    remote = cli("--server", "http://expflow.test", "iem", "check", *GOLDEN, "--budget", "500")
    assert local == remote


def test_server_mode_input_error(served, capsys):
    code, _ = cli("--server", "http://expflow.test", "iem", "check",
                  "--lengths", "1/2", "1/3", "--perm", "2", "1")
    assert code == EXIT_INPUT
    assert "error" in capsys.readouterr().err
