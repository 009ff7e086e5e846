"""Experiment orchestration: dataset generation, training sweeps over models,
layer counts and seeds, entropy analysis, and CSV reports.

Output CSV schemas
------------------
runs.csv:    dataset_seed, model, layers, train_seed, test_acc, val_acc,
             n_params, wall_seconds
summary.csv: model, layers, mean_acc, std_acc, n_params_min, n_params_max
entropy.csv: variant, layers, mean_entropy_bits, std_entropy_bits, mode

Reruns with an identical configuration reproduce every CSV byte for byte,
except the wall_seconds column of runs.csv which records measured time.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines, datasets, qsn, topology, training
from .qsn import LayerVariant
from .quantum import basis_probabilities, sample_shots, shannon_entropy
from .training import GradientMode, TrainConfig

MODEL_NAMES = ("sqsn", "bqsn", "mlp", "gscn")
DEFAULT_ENTROPY_DRAWS = 50


@dataclass
class ExperimentConfig:
    task: str = "task1"
    models: tuple[str, ...] = ("sqsn", "bqsn", "mlp", "gscn")
    layer_range: tuple[int, ...] = (1, 2, 3, 4, 5)
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    dataset_seeds: tuple[int, ...] = tuple(range(10))
    training: TrainConfig = field(default_factory=TrainConfig)
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.task not in ("task1", "task2"):
            raise ValueError(f"unknown task {self.task!r}")
        unknown = set(self.models) - set(MODEL_NAMES)
        if unknown:
            raise ValueError(f"unknown models {sorted(unknown)}")
        if not (self.models and self.seeds and self.layer_range and self.dataset_seeds):
            raise ValueError("models, seeds, layer_range, dataset_seeds must be nonempty")


# ---------------------------------------------------------------------------
# dataset plumbing
# ---------------------------------------------------------------------------

def make_dataset(task: str, dataset_seed: int, n_signals: int | None = None):
    """Deterministically generate (complex, dataset, meta) for a task seed."""
    rng = np.random.default_rng(dataset_seed)
    if task == "task1":
        config = datasets.Task1Config(seed=dataset_seed)
        if n_signals is not None:
            config = replace(config, signals_per_dataset=n_signals)
        complex_, dataset = datasets.generate_task1(config, rng)
        meta = datasets.task_config_to_meta("task1", config)
    else:
        config = datasets.Task2Config(seed=dataset_seed)
        if n_signals is not None:
            config = replace(config, n_signals=n_signals)
        complex_, dataset, edge_class = datasets.generate_task2(config, rng)
        meta = datasets.task_config_to_meta("task2", config)
        meta["edge_class"] = edge_class.tolist()
    meta["dataset_seed"] = dataset_seed
    return complex_, dataset, meta


def n_classes_for_task(task: str) -> int:
    return 2 if task == "task1" else 3


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

def build_classifier(model_name: str, complex_: topology.SimplicialComplex2,
                     layers: int, n_classes: int, train_seed: int,
                     gradient_mode: GradientMode = GradientMode.ADJOINT):
    """Instantiate one of the four architectures with seeded initialization.

    Classical baselines are sized by budget-matching against the quantum
    parameter count at the same depth.
    """
    rng = np.random.default_rng(train_seed)
    inc = topology.build_incidence(complex_)
    lap = topology.build_laplacians(inc)
    _, _, _, p = qsn.parameter_count(complex_)
    nq = complex_.n_simplices
    qsn_total = layers * p + n_classes * nq + n_classes

    if model_name in ("sqsn", "bqsn"):
        variant = LayerVariant.SCHEMATIC if model_name == "sqsn" else LayerVariant.BASE
        plan = qsn.compile_plan(complex_, lap, inc, variant)
        model = qsn.init_model(plan, layers, rng, fingerprint=complex_.fingerprint())
        head = training.zero_head(n_classes, nq)
        return training.QsnClassifier(model, head, gradient_mode)
    if model_name == "mlp":
        family = baselines.MlpFamily(in_dim=nq, n_classes=n_classes, depth=layers)
        widths = baselines.match_parameter_budget(qsn_total, family)
        return baselines.build_mlp_classifier(nq, widths, n_classes, rng)
    if model_name == "gscn":
        family = baselines.GscnFamily(n_simplices=nq, n_classes=n_classes, depth=layers)
        widths = baselines.match_parameter_budget(qsn_total, family)
        return baselines.build_gscn_classifier(complex_, layers, widths[0], n_classes, rng)
    raise ValueError(f"unknown model {model_name!r}")


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    dataset_seed: int
    model: str
    layers: int
    train_seed: int
    test_acc: float
    val_acc: float
    n_params: int
    wall_seconds: float


def run_single(task: str, dataset_seed: int, model_name: str, layers: int,
               train_seed: int, train_config: TrainConfig,
               dataset_cache: dict | None = None,
               log_path=None) -> RunResult:
    """Generate/load the dataset, build, train, and evaluate one model."""
    key = (task, dataset_seed)
    if dataset_cache is not None and key in dataset_cache:
        complex_, dataset = dataset_cache[key]
    else:
        complex_, dataset, _ = make_dataset(task, dataset_seed)
        dataset = datasets.normalize_dataset(dataset)
        if dataset_cache is not None:
            dataset_cache[key] = (complex_, dataset)
    config = replace(train_config, seed=train_seed)
    classifier = build_classifier(model_name, complex_, layers,
                                  n_classes_for_task(task), train_seed,
                                  config.gradient_mode)
    t0 = time.perf_counter()
    result = training.train(classifier, dataset, config)
    wall = time.perf_counter() - t0
    if log_path is not None:
        training.write_log_csv(result.log, log_path)
    test_acc = training.evaluate(classifier, dataset, "test")
    val_acc = max(r.val_acc for r in result.log)
    return RunResult(dataset_seed, model_name, layers, train_seed,
                     test_acc, val_acc, classifier.n_params, wall)


def _run_single_star(args):
    task, ds, m, l, s, train_config = args
    return run_single(task, ds, m, l, s, train_config)


def run_experiment(config: ExperimentConfig) -> list[RunResult]:
    """Full grid sweep; writes runs.csv and summary.csv under out_dir.

    Grid cells run in parallel across ``workers`` processes; results are
    gathered in grid order so outputs do not depend on scheduling.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = [(ds, m, l, s)
            for ds in config.dataset_seeds
            for m in config.models
            for l in config.layer_range
            for s in config.seeds]
    if config.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        jobs = [(config.task, ds, m, l, s, config.training) for ds, m, l, s in grid]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_single_star, jobs))
    else:
        cache: dict = {}
        results = [run_single(config.task, ds, m, l, s, config.training, cache)
                   for ds, m, l, s in grid]
    write_runs_csv(results, out / "runs.csv")
    write_summary_csv(results, config, out / "summary.csv")
    (out / "config.json").write_text(json.dumps(_config_payload(config), indent=2))
    return results


def _config_payload(config: ExperimentConfig) -> dict:
    payload = {
        "task": config.task,
        "models": list(config.models),
        "layer_range": list(config.layer_range),
        "seeds": list(config.seeds),
        "dataset_seeds": list(config.dataset_seeds),
        "out_dir": str(config.out_dir),
        "workers": config.workers,
        "training": {
            "learning_rate": config.training.learning_rate,
            "batch_size": config.training.batch_size,
            "max_epochs": config.training.max_epochs,
            "patience": config.training.patience,
            "gradient_mode": config.training.gradient_mode.value,
            "early_stop_metric": config.training.early_stop_metric,
        },
    }
    return payload


def write_runs_csv(results: list[RunResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset_seed", "model", "layers", "train_seed",
                    "test_acc", "val_acc", "n_params", "wall_seconds"])
        for r in results:
            w.writerow([r.dataset_seed, r.model, r.layers, r.train_seed,
                        f"{r.test_acc:.10g}", f"{r.val_acc:.10g}",
                        r.n_params, f"{r.wall_seconds:.3f}"])


def write_summary_csv(results: list[RunResult], config: ExperimentConfig, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "layers", "mean_acc", "std_acc",
                    "n_params_min", "n_params_max"])
        for model in config.models:
            for layers in config.layer_range:
                accs = [r.test_acc for r in results
                        if r.model == model and r.layers == layers]
                ps = [r.n_params for r in results
                      if r.model == model and r.layers == layers]
                if not accs:
                    continue
                w.writerow([model, layers,
                            f"{np.mean(accs):.10g}", f"{np.std(accs):.10g}",
                            min(ps), max(ps)])


# ---------------------------------------------------------------------------
# entropy analysis
# ---------------------------------------------------------------------------

@dataclass
class EntropyRow:
    variant: str
    layers: int
    mean_entropy_bits: float
    std_entropy_bits: float
    mode: str  # "exact" or "sampled"


def run_entropy_analysis(task: str, dataset_seed: int,
                         layer_range=(1, 2, 3, 4, 5), shots: int = 10_000,
                         draws: int = DEFAULT_ENTROPY_DRAWS, seed: int = 0,
                         variants=(LayerVariant.BASE, LayerVariant.SCHEMATIC)) -> list[EntropyRow]:
    """Output-distribution entropy of randomly parameterized circuits.

    One fixed datapoint (the dataset's first signal, normalized) seeds the
    encoding; for each variant and layer count, ``draws`` random normal(0, pi)
    parameter sets are evaluated, and both the exact basis-distribution
    entropy and the plug-in entropy of a ``shots``-sample histogram are
    aggregated into mean and standard deviation.
    """
    complex_, dataset, _ = make_dataset(task, dataset_seed)
    dataset = datasets.normalize_dataset(dataset)
    signal = dataset.signals[0]
    inc = topology.build_incidence(complex_)
    lap = topology.build_laplacians(inc)
    rng = np.random.default_rng(seed)

    rows = []
    for variant in variants:
        plan = qsn.compile_plan(complex_, lap, inc, variant)
        for layers in layer_range:
            exact_vals, sampled_vals = [], []
            for _ in range(draws):
                model = qsn.init_model(plan, layers, rng)
                program = qsn.compile_program(plan, layers)
                angles = qsn.bind_angles(program, signal, model.layer_params.ravel())
                probs = basis_probabilities(qsn.run_bound_program(program, angles))
                exact_vals.append(shannon_entropy(probs))
                counts = sample_shots(probs, shots, rng)
                sampled_vals.append(shannon_entropy(counts / shots))
            rows.append(EntropyRow(variant.value, layers,
                                   float(np.mean(exact_vals)), float(np.std(exact_vals)),
                                   "exact"))
            rows.append(EntropyRow(variant.value, layers,
                                   float(np.mean(sampled_vals)), float(np.std(sampled_vals)),
                                   "sampled"))
    return rows


def write_entropy_csv(rows: list[EntropyRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variant", "layers", "mean_entropy_bits",
                    "std_entropy_bits", "mode"])
        for r in rows:
            w.writerow([r.variant, r.layers, f"{r.mean_entropy_bits:.10g}",
                        f"{r.std_entropy_bits:.10g}", r.mode])


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def report(results_dir) -> str:
    """Human-readable accuracy and parameter tables from a results directory."""
    results_dir = Path(results_dir)
    summary_path = results_dir / "summary.csv"
    if not summary_path.exists():
        raise FileNotFoundError(f"no summary.csv under {results_dir}")
    with open(summary_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{summary_path} is empty")

    models = list(dict.fromkeys(r["model"] for r in rows))
    layer_counts = sorted({int(r["layers"]) for r in rows})
    acc = {(r["model"], int(r["layers"])): float(r["mean_acc"]) for r in rows}
    pmin = {(r["model"], int(r["layers"])): r["n_params_min"] for r in rows}
    pmax = {(r["model"], int(r["layers"])): r["n_params_max"] for r in rows}

    lines = ["mean test accuracy per layer count", "model " + " ".join(f"{l:>8d}" for l in layer_counts)]
    for m in models:
        cells = [f"{acc[(m, l)]:8.3f}" if (m, l) in acc else " " * 8 for l in layer_counts]
        lines.append(f"{m:5s} " + " ".join(cells))
    lines.append("")
    lines.append("parameter count (min-max) per layer count")
    for m in models:
        cells = []
        for l in layer_counts:
            cells.append(f"{pmin[(m, l)]}-{pmax[(m, l)]}" if (m, l) in pmin else "")
        lines.append(f"{m:5s} " + " ".join(f"{c:>11s}" for c in cells))
    lines.append("")
    for l in layer_counts:
        scored = [(m, acc[(m, l)]) for m in models if (m, l) in acc]
        best = max(scored, key=lambda ma: ma[1])[0] if scored else "-"
        lines.append(f"best model at {l} layer(s): {best}")
    text = "\n".join(lines)
    entropy_path = results_dir / "entropy.csv"
    if entropy_path.exists():
        text += "\n\nentropy analysis present: " + str(entropy_path)
    return text
