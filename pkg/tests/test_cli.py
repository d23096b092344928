import csv
import json
import os
import subprocess
import sys

import pytest

from unicell import cli, stats
from unicell.validation import Check


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_theory_values(capsys):
    code, out = run(capsys, "theory", "--lambda", "0", "1", "--lambda", "1", "1", "--pk", "1")
    assert code == 0
    assert out["lambda"][0]["value"] == pytest.approx(0.2606513, abs=1e-7)
    assert out["lambda"][1]["value"] == 0.0
    assert out["pk"][0]["value"] == pytest.approx(0.792, abs=5e-4)
    assert set(out) == {"lambda", "pk"}


def test_theory_defaults_and_lambda_tables(capsys):
    code, out = run(capsys, "theory")
    assert code == 0
    assert set(out) == {"lambda", "systole_cdf", "pk"}
    assert out["systole_cdf"][1]["value"] == pytest.approx(stats.systole_cdf(1.0))
    code, out = run(capsys, "theory", "--lambda-k", "0", "1", "1", "--Lambda", "0", "1", "2")
    assert out["lambda_k"][0]["value"] == pytest.approx(0.25, rel=1e-14)
    assert out["Lambda_k_m"][0]["exact"] == str(stats.lambda_k_m_exact(0, 1, 2))


@pytest.mark.parametrize(
    "argv",
    [
        ["theory", "--lambda", "2", "1"],
        ["theory", "--pk", "0"],
        ["theory", "--systole", "-1"],
        ["theory", "--lambda-k", "0", "1", "1.5"],
        ["validate", "nonsense"],
        ["run", "--n", "3", "--g", "5", "--samples", "1"],
        ["run", "--n", "10", "--g", "1"],
        ["oracle", "trees", "--n", "20"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_validate_failure_exits_1(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_suite", lambda name: [Check("forced", False, 1, 0)])
    code, out = run(capsys, "validate", "counters")
    assert code == 1
    assert out["pass"] is False and out["checks"][0]["check"] == "forced"


@pytest.mark.parametrize("suite", ["counters", "lemmas"])
def test_validate_passes(suite, capsys):
    code, out = run(capsys, "validate", suite)
    assert code == 0 and out["pass"] is True
    assert all(c["pass"] for c in out["checks"])


def test_sample_command(capsys):
    code, out = run(capsys, "sample", "--n", "30", "--g", "2", "--seed", "5", "--graph")
    assert code == 0
    assert len(out["tree"]) == 60
    assert sorted(len(c) for c in out["sigma"]) == [3, 3]
    assert out["graph"] is not None and out["cap"] >= 1
    code2, again = run(capsys, "sample", "--n", "30", "--g", "2", "--seed", "5", "--graph")
    assert again == out


def test_sample_genus_zero(capsys):
    code, out = run(capsys, "sample", "--n", "10", "--g", "0")
    assert code == 0 and out["cycles"] == [] and out["sigma"] == []


def test_run_two_one_with_loops(capsys, tmp_path):
    p = tmp_path / "r.json"
    with pytest.warns(UserWarning, match="below 1"):
        code, out = run(capsys, "run", "--n", "2", "--g", "1", "--samples", "5", "--include-loops",
                        "--workers", "1", "--output", str(p))
    assert code == 0 and out["samples"] == 5
    data = json.loads(p.read_text())
    for s in data["samples"]:
        assert [(c["len"], c["k"], c["loop"]) for c in s["cycles"]] == [(1, 1, True)] * 2
    assert json.loads((tmp_path / "r.summary.json").read_text()) == out


def test_run_csv(capsys, tmp_path):
    p = tmp_path / "r.csv"
    code, out = run(capsys, "run", "--n", "500", "--g", "2", "--samples", "20", "--workers", "1",
                    "--format", "csv", "--output", str(p), "--windows", "0:0.5,0.5:2")
    assert code == 0
    with p.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample_id", "seed", "systole", "shortest_k", "count[0,0.5)", "count[0.5,2)"]
    assert len(rows) == 21
    assert [w["window"] for w in out["windows"]] == [[0.0, 0.5], [0.5, 2.0]]


def test_oracle_commands(capsys):
    code, out = run(capsys, "oracle", "trees", "--n", "3")
    assert code == 0 and out["count"] == 5
    code, out = run(capsys, "oracle", "cperms", "--n", "5", "--g", "1")
    assert out["count"] == 20
    code, out = run(capsys, "oracle", "maps", "--n", "2", "--g", "1", "--include-loops")
    assert out["distribution"] == [{"profile": [[1, 1], [1, 1]], "probability": "1"}]
    code, out = run(capsys, "oracle", "pairs", "--n", "4", "--l1", "1", "--l2", "1")
    assert code == 0 and out["ok"] and out["union_bound"] == 128


def test_backends_produce_identical_samples(tmp_path):
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, UNICELL_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, "-m", "unicell", "sample", "--n", "3000", "--g", "8", "--seed", "2", "--graph"],
            env=env, capture_output=True, text=True, check=True, timeout=600,
        )
        outs.append(json.loads(proc.stdout))
    assert outs[0] == outs[1]
    assert outs[0]["cycles"]
