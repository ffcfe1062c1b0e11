import csv
import json

import pytest

from bellpara.cli import main, write_report

FAST = {
    "verify-psd": ["--samples", "300"],
    "verify-properties": ["--samples", "300", "--c1-samples", "50", "--mollified-samples", "20"],
    "dyadic-test": ["--trials", "30", "--max-depth", "5", "--bellman-points", "2", "--bellman-depth", "3",
                    "--bellman-iters", "5"],
    "martingale-sim": ["--trials", "10", "--depth", "4", "--paths", "2000", "--partitions", "4,16"],
    "heat-test": ["--triples", "1", "--lambda-triples", "1"],
    "search-coeffs": ["--samples", "200", "--budget", "10"],
}


def test_eval_triple_point(capsys):
    assert main(["eval", "--p", "2", "--q", "6", "--r", "3", "--point", "1,1,1"]) == 0
    out = capsys.readouterr().out
    assert "A = 58213" in out
    assert "region = Boundary" in out


def test_eval_bellman_point(capsys, tmp_path):
    out = tmp_path / "e.json"
    assert main(["eval", "--point", "1,1,1,1,1,1", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["results"][0]["B"] == 55835


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["eval"],
    ["eval", "--point", "1,1"],
    ["verify-psd", "--p", "3", "--q", "3", "--r", "3", "--samples", "10"],
    ["verify-psd", "--A", "1", "--samples", "10"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_psd_pass_and_report_schema(tmp_path):
    out = tmp_path / "psd.json"
    assert main(["verify-psd", "--samples", "500", "--seed", "7", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert list(rep) == ["tool", "version", "command", "config", "results", "summary"]
    assert rep["summary"]["verdict"] == "pass"
    assert len(rep["results"]) == 12
    with open(out.with_name("psd.witnesses.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows == [["check"]]


def test_psd_unit_coefficients_fail_with_witnesses(tmp_path):
    out = tmp_path / "bad.json"
    code = main(["verify-psd", "--A", "1", "--B", "1", "--C", "1", "--samples", "300", "--out", str(out)])
    assert code == 1
    rep = json.loads(out.read_text())
    assert rep["summary"]["verdict"] == "fail"
    with open(out.with_name("bad.witnesses.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["check", "v0", "v1"]
    assert len(rows) - 1 == rep["summary"]["witnesses"] > 0


@pytest.mark.parametrize("cmd", list(FAST))
def test_every_command_byte_identical_across_threads(cmd, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main([cmd, *FAST[cmd], "--threads", "1", "--out", str(a)]) == 0
    assert main([cmd, *FAST[cmd], "--threads", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_name("a.witnesses.csv").read_bytes() == b.with_name("b.witnesses.csv").read_bytes()


def test_replay_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify-properties", *FAST["verify-properties"], "--seed", "3", "--out", str(out)]) == 0
    again = tmp_path / "r2.json"
    assert main(["replay", str(out), "--out", str(again)]) == 0
    assert "results identical" in capsys.readouterr().out
    assert out.read_bytes() == again.read_bytes()


def test_replay_failing_report(tmp_path, capsys):
    out = tmp_path / "f.json"
    main(["verify-psd", "--A", "1", "--B", "1", "--C", "1", "--samples", "100", "--out", str(out)])
    assert main(["replay", str(out)]) == 1
    assert "matches stored" in capsys.readouterr().out


def test_timing_only_on_request(tmp_path):
    out = tmp_path / "t.json"
    main(["verify-psd", "--samples", "50", "--timing", "--out", str(out)])
    assert "wall_time" in json.loads(out.read_text())


def test_write_report_non_finite(tmp_path):
    path = tmp_path / "x.json"
    write_report({"a": float("inf"), "b": [1.5, float("nan")]}, path, [("chk", [1.0, 2.0])])
    assert json.loads(path.read_text()) == {"a": "inf", "b": [1.5, "nan"]}
    assert path.with_name("x.witnesses.csv").read_text().splitlines() == ["check,v0,v1", "chk,1.0,2.0"]
