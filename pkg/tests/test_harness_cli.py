import csv
import json
import math

import numpy as np
import pytest

from cadro.cli import main
from cadro.harness import (
    CSV_HEADER,
    ExperimentSpec,
    coverage_audit,
    read_csv,
    rows_to_csv,
    run_experiment,
    summarize,
)
from cadro.pipeline import PipelineConfig


@pytest.fixture(scope="module")
def inst_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("inst") / "inst.json"
    assert main(["generate", "--seed", "7", "--n", "50", "--n-x", "3", "--out", str(path)]) == 0
    return path


def test_generate_file(inst_path, tmp_path, capsys):
    d = json.loads(inst_path.read_text())
    assert d["n"] == 50 and len(d["points"]) == 50 and len(d["boxes"]) == 3
    again = tmp_path / "again.json"
    main(["generate", "--seed", "7", "--n", "50", "--n-x", "3", "--out", str(again)])
    assert again.read_bytes() == inst_path.read_bytes()
    assert "seed=7" in capsys.readouterr().out


def test_generate_validation(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["generate", "--seed", "1", "--n", "0", "--out", str(tmp_path / "x.json")])
    assert e.value.code != 0


def run_json(capsys, *args):
    assert main(["run", *args]) == 0
    return json.loads(capsys.readouterr().out)


def test_run_cadro(inst_path, capsys):
    out = run_json(capsys, "--instance", str(inst_path), "--method", "cadro", "--m", "200")
    for key in ("v_hat", "v_oos", "alpha_bound", "tau"):
        assert key in out
    assert out["tau"] == 114 and out["v_hat"] <= out["alpha_bound"] + 1e-12


def test_run_cadro_coverage_over_seeds(inst_path, capsys):
    ok = 0
    for seed in range(30):
        out = run_json(capsys, "--instance", str(inst_path), "--m", "200", "--seed", str(seed))
        ok += out["v_oos"] <= out["v_hat"]
    assert ok >= 29


def test_run_robust_ignores_data(inst_path, capsys):
    a = run_json(capsys, "--instance", str(inst_path), "--method", "robust", "--m", "20", "--seed", "1")
    b = run_json(capsys, "--instance", str(inst_path), "--method", "robust", "--m", "300", "--seed", "5")
    assert a["v_hat"] == b["v_hat"]


def test_run_tv_vacuous(inst_path, capsys):
    rob = run_json(capsys, "--instance", str(inst_path), "--method", "robust", "--m", "10")
    tv = run_json(capsys, "--instance", str(inst_path), "--method", "tv", "--m", "10")
    assert tv["v_hat"] == pytest.approx(rob["v_hat"], rel=1e-3)


def test_run_errors(inst_path, capsys):
    assert main(["run", "--instance", str(inst_path), "--m", "1"]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--instance", str(inst_path), "--method", "nope", "--m", "10"])
    assert main(["run", "--instance", "/nonexistent/x.json", "--m", "10"]) == 2


def test_experiment_outputs(inst_path, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    args = ["experiment", "--instance", str(inst_path), "--methods", "cadro,tv,robust",
            "--m-grid", "25,50", "--reps", "3", "--out", str(out)]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 3 * 2 * 3
    rows = read_csv(out)
    keys = [(r["method"], r["m"], r["rep"]) for r in rows]
    assert keys == sorted(keys)
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    summary = tmp_path / "sweep_summary.csv"
    assert summary.exists()


def test_summary_single_rep(small_instance):
    spec = ExperimentSpec(methods=("cadro",), m_grid=(30,), reps=1)
    rows = run_experiment(small_instance, spec, PipelineConfig())
    (s,) = summarize(rows)
    v = rows[0]["v_hat"]
    for key, val in s.items():
        if key.startswith("v_hat_"):
            assert val == pytest.approx(v)


def test_parallel_matches_serial(small_instance):
    spec = ExperimentSpec(methods=("cadro", "kl"), m_grid=(20, 40), reps=2)
    a = rows_to_csv(run_experiment(small_instance, spec, PipelineConfig(), jobs=1))
    b = rows_to_csv(run_experiment(small_instance, spec, PipelineConfig(), jobs=2))
    assert a == b


def test_paired_datasets_across_methods(small_instance):
    one = run_experiment(small_instance, ExperimentSpec(methods=("tv",), m_grid=(30,), reps=2), PipelineConfig())
    two = run_experiment(small_instance, ExperimentSpec(methods=("cadro", "tv"), m_grid=(30,), reps=2), PipelineConfig())
    assert rows_to_csv(one) == rows_to_csv([r for r in two if r["method"] == "tv"])


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(reps=0)
    with pytest.raises(ValueError):
        ExperimentSpec(m_grid=(50, 25))
    with pytest.raises(ValueError):
        ExperimentSpec(m_grid=(1, 5))


def test_coverage_command(tmp_path, capsys):
    inst = tmp_path / "small.json"
    main(["generate", "--seed", "7", "--n", "10", "--n-x", "2", "--out", str(inst)])
    report = tmp_path / "cov.json"
    code = main(["coverage", "--instance", str(inst), "--m", "50", "--reps", "60", "--out", str(report)])
    d = json.loads(report.read_text())
    assert code == (0 if d["passed"] else 3)
    assert {"violation_fraction", "membership_fraction", "implication_failures"} <= set(d)
    assert d["implication_failures"] == 0


def test_coverage_beta_high(small_instance):
    rep = coverage_audit(small_instance, 40, 50, PipelineConfig(beta=0.99))
    assert rep["violation_fraction"] <= 0.99 + 3 * math.sqrt(0.99 * 0.01 / 50)
    assert rep["passed"]
