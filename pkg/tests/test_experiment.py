import csv
import json

import numpy as np
import pytest

from unicell import experiment, oracle
from unicell.experiment import ExperimentConfig, derive_seed, run_experiment, run_sample, summary_report
from unicell.stats import ExperimentSummary, WindowSpec


def test_derive_seed_frozen():
    assert derive_seed(0, 0) == derive_seed(0, 0)
    assert derive_seed(0, 0) != derive_seed(0, 1) != derive_seed(1, 0)
    assert derive_seed(7, 3) == 7758145696617331093


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("UNICELL_WORKERS", "3")
    assert experiment.default_workers() == 3
    monkeypatch.setenv("UNICELL_WORKERS", "zero")
    with pytest.raises(ValueError):
        experiment.default_workers()
    monkeypatch.setenv("UNICELL_WORKERS", "0")
    with pytest.raises(ValueError):
        experiment.default_workers()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=10, g=1, samples=0),
        dict(n=10, g=6, samples=1),
        dict(n=10, g=1, samples=1, x_max=1.5),
        dict(n=10, g=1, samples=1, format="xml"),
    ],
)
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_two_one_gives_two_loops():
    for s in range(20):
        r = run_sample(2, 1, 1, True, s, derive_seed(0, s))
        assert r.lengths.tolist() == [1, 1]
        assert r.junctions.tolist() == [1, 1]
    assert oracle.exact_map_statistics(2, 1).as_dict() == {((1, 1), (1, 1)): 1}


def test_genus_zero_has_no_cycles(tmp_path):
    cfg = ExperimentConfig(n=50, g=0, samples=30, workers=1, output=str(tmp_path / "g0.json"))
    summary = run_experiment(cfg)
    assert summary.window_counts.sum() == 0
    assert (summary.systole == -1).all()
    assert summary_report(summary)["total_cycles"] == 0
    data = json.loads((tmp_path / "g0.json").read_text())
    assert data["complete"] and all(s["cycles"] == [] for s in data["samples"])


def test_output_independent_of_workers(tmp_path, monkeypatch):
    paths = []
    for workers in (1, 3):
        (tmp_path / str(workers)).mkdir()
        p = tmp_path / str(workers) / "run.json"
        # the output path is part of the recorded config, so run from matching names
        cfg = ExperimentConfig(n=400, g=3, samples=160, master_seed=11, workers=workers, output="run.json")
        monkeypatch.chdir(p.parent)
        run_experiment(cfg)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_schema(tmp_path):
    p = tmp_path / "run.csv"
    cfg = ExperimentConfig(
        n=300, g=2, samples=40, windows=WindowSpec.parse("0:1,1:2,2:3"), workers=1, output=str(p), format="csv"
    )
    summary = run_experiment(cfg)
    with p.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample_id", "seed", "systole", "shortest_k", "count[0,1)", "count[1,2)", "count[2,3)"]
    assert len(rows) == 41
    body = np.array(rows[1:], dtype=object)
    assert [int(x) for x in body[:, 0]] == list(range(40))
    assert [int(x) for x in body[:, 2]] == summary.systole.tolist()
    counts = np.array(body[:, 4:], dtype=np.int64)
    assert np.array_equal(counts, summary.window_counts)


def test_json_mirrors_summary(tmp_path):
    p = tmp_path / "run.json"
    cfg = ExperimentConfig(n=300, g=2, samples=25, workers=1, output=str(p))
    summary = run_experiment(cfg)
    data = json.loads(p.read_text())
    assert data["complete"] is True
    assert data["config"]["cap"] == cfg.cap and "workers" not in data["config"]
    for s, row in enumerate(data["samples"]):
        prof = summary.profiles[s]
        assert [(c["len"], c["k"]) for c in row["cycles"]] == [tuple(x) for x in prof.tolist()]
        assert row["counts"] == summary.window_counts[s].tolist()


def test_interrupted_run_leaves_valid_partial_file(tmp_path, monkeypatch):
    real = experiment.run_sample

    def flaky(n, g, cap, include_loops, sample_id, seed):
        if sample_id == 1234:
            raise KeyboardInterrupt
        return real(n, g, cap, include_loops, sample_id, seed)

    monkeypatch.setattr(experiment, "run_sample", flaky)
    for fmt in ("json", "csv"):
        p = tmp_path / f"partial.{fmt}"
        cfg = ExperimentConfig(n=20, g=1, samples=3000, workers=1, output=str(p), format=fmt)
        with pytest.raises(KeyboardInterrupt):
            run_experiment(cfg)
        if fmt == "json":
            data = json.loads(p.read_text())
            assert data["complete"] is False
            assert len(data["samples"]) == 1000
        else:
            with p.open() as fh:
                assert len(list(csv.reader(fh))) == 1001


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = ExperimentConfig(n=20, g=1, samples=2, workers=1, output=str(blocker / "out.json"))
    with pytest.raises(OSError):
        run_experiment(cfg)


def test_summary_merge_is_order_independent():
    cfg = ExperimentConfig(n=200, g=2, samples=60, workers=1, master_seed=3)
    full = run_experiment(cfg)
    results = [run_sample(200, 2, cfg.cap, False, s, derive_seed(3, s)) for s in range(60)]
    a = ExperimentSummary.from_results(200, 2, cfg.windows, results[30:])
    b = ExperimentSummary.from_results(200, 2, cfg.windows, results[:30])
    merged = a.merge(b)
    assert np.array_equal(merged.window_counts, full.window_counts)
    assert np.array_equal(merged.systole, full.systole)
    assert np.array_equal(b.merge(a).window_k_counts, full.window_k_counts)
