import csv
import json

import numpy as np
import pytest

from qsimplicial import experiments
from qsimplicial.cli import main as cli_main
from qsimplicial.experiments import ExperimentConfig, run_entropy_analysis
from qsimplicial.qsn import LayerVariant, parameter_count
from qsimplicial.training import GradientMode, TrainConfig


def tiny_train_config():
    return TrainConfig(max_epochs=2, patience=2, seed=0,
                       gradient_mode=GradientMode.ADJOINT)


def tiny_config(out_dir, models=("mlp",), layers=(1,), seeds=(0,)):
    return ExperimentConfig(
        task="task1", models=models, layer_range=layers, seeds=seeds,
        dataset_seeds=(9,), training=tiny_train_config(), out_dir=str(out_dir))


def test_single_run_row(tmp_path):
    config = tiny_config(tmp_path / "r")
    results = experiments.run_experiment(config)
    assert len(results) == 1
    runs = (tmp_path / "r" / "runs.csv").read_text().strip().splitlines()
    assert runs[0] == ("dataset_seed,model,layers,train_seed,test_acc,val_acc,"
                       "n_params,wall_seconds")
    assert len(runs) == 2
    summary = (tmp_path / "r" / "summary.csv").read_text().strip().splitlines()
    assert summary[0] == "model,layers,mean_acc,std_acc,n_params_min,n_params_max"
    assert len(summary) == 2


def test_summary_mean_equals_rows(tmp_path):
    config = tiny_config(tmp_path / "r", seeds=(0, 1))
    experiments.run_experiment(config)
    with open(tmp_path / "r" / "runs.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    with open(tmp_path / "r" / "summary.csv", newline="") as fh:
        summary = list(csv.DictReader(fh))
    accs = [float(r["test_acc"]) for r in rows]
    assert float(summary[0]["mean_acc"]) == pytest.approx(np.mean(accs), abs=1e-9)


def test_sweep_determinism_excluding_wall_time(tmp_path):
    """Identical configs reproduce every CSV byte except wall_seconds."""
    for name in ("a", "b"):
        experiments.run_experiment(tiny_config(tmp_path / name, models=("mlp", "sqsn")))
    summaries = [(tmp_path / n / "summary.csv").read_bytes() for n in ("a", "b")]
    assert summaries[0] == summaries[1]

    def strip_wall(path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return [r[:-1] for r in rows]

    assert strip_wall(tmp_path / "a" / "runs.csv") == strip_wall(tmp_path / "b" / "runs.csv")


def test_quantum_param_column_matches_formula(tmp_path):
    config = tiny_config(tmp_path / "r", models=("sqsn",), layers=(2,))
    results = experiments.run_experiment(config)
    complex_, _, _ = experiments.make_dataset("task1", 9)
    p = parameter_count(complex_)[3]
    n_classes = 2
    expected = 2 * p + n_classes * complex_.n_simplices + n_classes
    assert results[0].n_params == expected


def test_entropy_rows_structure():
    rows = run_entropy_analysis("task1", dataset_seed=9, layer_range=(1, 2),
                                shots=200, draws=3, seed=0)
    assert len(rows) == 2 * 2 * 2  # variants x layers x modes
    key = {(r.variant, r.layers, r.mode) for r in rows}
    assert ("base", 1, "exact") in key and ("schematic", 2, "sampled") in key
    complex_, _, _ = experiments.make_dataset("task1", 9)
    for r in rows:
        assert 0.0 <= r.mean_entropy_bits <= complex_.n_simplices


def test_entropy_determinism(tmp_path):
    for name in ("a", "b"):
        rows = run_entropy_analysis("task1", dataset_seed=9, layer_range=(1,),
                                    shots=100, draws=2, seed=3)
        experiments.write_entropy_csv(rows, tmp_path / f"{name}.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_report_output(tmp_path):
    config = tiny_config(tmp_path / "r", models=("mlp",), layers=(1,))
    experiments.run_experiment(config)
    text = experiments.report(tmp_path / "r")
    assert "mean test accuracy" in text
    assert "best model at 1 layer(s): mlp" in text
    with pytest.raises(FileNotFoundError):
        experiments.report(tmp_path / "missing")


def test_report_ties_to_first_listed_model(tmp_path):
    out = tmp_path / "r"
    out.mkdir()
    (out / "summary.csv").write_text(
        "model,layers,mean_acc,std_acc,n_params_min,n_params_max\n"
        "sqsn,1,0.9,0.01,50,50\n"
        "bqsn,1,0.9,0.01,50,50\n")
    text = experiments.report(out)
    assert "best model at 1 layer(s): sqsn" in text


def test_cli_gen_data_and_roundtrip(tmp_path, capsys):
    rc = cli_main(["gen-data", "--task", "task1", "--dataset-seed", "9",
                   "--n-signals", "40", "--out", str(tmp_path / "data")])
    assert rc == 0
    from qsimplicial.datasets import load_dataset
    cx, ds, meta = load_dataset(tmp_path / "data" / "task1-seed9")
    assert len(ds.signals) == 40
    assert meta["task"] == "task1"
    assert meta["dataset_seed"] == 9


def test_cli_train_writes_artifacts(tmp_path):
    rc = cli_main(["train", "--task", "task1", "--model", "mlp",
                   "--layers", "1", "--seed", "0", "--dataset-seed", "9",
                   "--epochs", "2", "--patience", "2",
                   "--out", str(tmp_path / "run")])
    assert rc == 0
    result = json.loads((tmp_path / "run" / "result.json").read_text())
    assert result["model"] == "mlp"
    assert 0.0 <= result["test_acc"] <= 1.0
    log = (tmp_path / "run" / "log.csv").read_text().splitlines()
    assert log[0] == "epoch,train_loss,val_loss,train_acc,val_acc"


def test_cli_sweep_config_file_and_flag_override(tmp_path):
    cfg = {
        "task": "task1",
        "models": ["mlp"],
        "layer_range": [1],
        "seeds": [0, 1],
        "dataset_seeds": [9],
        "training": {"max_epochs": 2, "patience": 2},
        "out_dir": str(tmp_path / "from-file"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    rc = cli_main(["sweep", "--config", str(path),
                   "--seed", "0", "--out", str(tmp_path / "out")])
    assert rc == 0
    # the --seed flag overrides the file's two seeds; only one run row
    runs = (tmp_path / "out" / "runs.csv").read_text().strip().splitlines()
    assert len(runs) == 2
    assert not (tmp_path / "from-file").exists()


def test_cli_entropy_and_report(tmp_path, capsys):
    rc = cli_main(["entropy", "--task", "task1", "--dataset-seed", "9",
                   "--layers", "1", "--shots", "100", "--draws", "2",
                   "--out", str(tmp_path / "ent")])
    assert rc == 0
    lines = (tmp_path / "ent" / "entropy.csv").read_text().strip().splitlines()
    assert lines[0] == "variant,layers,mean_entropy_bits,std_entropy_bits,mode"
    assert len(lines) == 5


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(task="task3")
    with pytest.raises(ValueError):
        ExperimentConfig(models=("nope",))
    with pytest.raises(ValueError):
        ExperimentConfig(models=())
