import json
import math
import os

import pytest

from mitograph import ConfigError, ExperimentConfig, list_experiments, run
from mitograph.cli import main
from mitograph.io import write_csv

COUNTS = {"experiment": "counts-law", "params": {"beta": 1.0, "mu": 0.0}, "t": math.log(2), "replicates": 20_000,
          "seed": 7}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_catalog_has_nine_kinds():
    cat = list_experiments()
    assert len(cat) == 9
    assert all("oracle" not in e for e in cat.values())
    assert all("oracle" in e for e in list_experiments(verbose=True).values())


def test_list_command(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "counts-law" in out and "oracle" not in out
    assert main(["list", "-v"]) == 0
    assert "oracle" in capsys.readouterr().out


def test_unknown_subcommand_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("doc", [
    {**COUNTS, "bogus": 1},
    {k: v for k, v in COUNTS.items() if k != "t"},
    {**COUNTS, "params": {"beta": 1.0, "mu": 1.0}},
    {**COUNTS, "params": {"beta": 1.0, "speed": 1.0}},
    {**COUNTS, "kernel": {"kind": "uniform", "a": 0.7}},
    {**COUNTS, "replicates": -5},
    {**COUNTS, "experiment": "nope"},
    {"experiment": "fde-solve", "times": [5.0], "l2_t_max": 3.0},
])
def test_malformed_config_rejected_without_artifacts(tmp_path, doc):
    path = _write(tmp_path, doc)
    out = tmp_path / "out"
    with pytest.raises(ConfigError):
        ExperimentConfig.load(path)
    assert main(["run", str(path), "--out", str(out), "--workers", "1"]) == 1
    assert not out.exists()


def test_unparseable_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 1


def test_counts_run_passes_and_writes_artifacts(tmp_path):
    path = _write(tmp_path, COUNTS)
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out), "--workers", "1"]) == 0
    report = json.loads((out / "report.json").read_text())
    names = [c["name"] for c in report["criteria"]]
    assert len(names) == len(set(names))
    assert report["passed"] and report["config"]["seed"] == 7
    header = (out / "ensemble.csv").read_text().splitlines()[0]
    assert header == "replicate,N,M"
    summary = json.loads((out / "summary.json").read_text())
    for key in ("params", "R", "mean_N", "se_N", "mean_M", "se_M", "extinct_fraction", "tv_counts", "ks_limit"):
        assert key in summary


def test_failed_criterion_exit_2(tmp_path):
    doc = {**COUNTS, "replicates": 200, "tv_tolerance": 1e-6}
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--workers", "1"]) == 2


def test_artifacts_bytewise_reproducible_across_workers(tmp_path):
    path = _write(tmp_path, COUNTS)
    run(path, out_dir=tmp_path / "a", workers=1)
    run(path, out_dir=tmp_path / "b", workers=2)
    for name in ("ensemble.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_changes_results(tmp_path):
    path = _write(tmp_path, COUNTS)
    run(path, out_dir=tmp_path / "a", workers=1)
    run(path, out_dir=tmp_path / "b", workers=1, seed=8)
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() != (tmp_path / "b" / "ensemble.csv").read_bytes()


def test_interrupted_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "x.csv"

    def boom(*args, **kwargs):
        raise KeyboardInterrupt

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(KeyboardInterrupt):
        write_csv(target, ["a"], [(1,)])
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize("doc, files", [
    ({"experiment": "fde-solve", "n_points": 256, "refine_sizes": [256, 512], "times": [0.5, 1.0]},
     {"fields_t0.5.csv", "fields_t1.csv", "convergence.json"}),
    ({"experiment": "traveling-wave", "c_values": [1.0, 3.0], "tol": 1e-3}, {"wave.json"}),
    ({"experiment": "kpp-front", "replicates": 20, "times": [4.0, 5.0, 6.0]}, {"front.csv", "particles.csv"}),
    ({"experiment": "invariant-density", "samples": 20_000, "tagged_samples": 5000, "dump_samples": 50},
     {"samples.csv", "moments.json"}),
])
def test_other_kinds_write_expected_files(tmp_path, doc, files):
    rep = run(doc, out_dir=tmp_path, workers=1)
    assert files <= set(rep.artifacts)
    assert (tmp_path / "report.json").exists()


def test_front_csv_columns(tmp_path):
    run({"experiment": "kpp-front", "replicates": 20, "times": [4.0, 5.0, 6.0]}, out_dir=tmp_path, workers=1)
    assert (tmp_path / "front.csv").read_text().splitlines()[0] == "t,empirical_radius,exact_radius,leading_radius"
    assert (tmp_path / "particles.csv").read_text().splitlines()[0] == "replicate,x,mass"
