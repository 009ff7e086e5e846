"""Command-line entry point.

Subcommands: gen-data, train, sweep, entropy, report.  A JSON config file
mirroring ExperimentConfig may be passed with --config; explicit flags
override file values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import datasets, experiments
from .training import GradientMode, TrainConfig


def _parse_int_list(text: str) -> tuple[int, ...]:
    """'1-5' or '0,1,2' or '3'."""
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(",") if x.strip())


def _add_common(p):
    p.add_argument("--task", choices=("task1", "task2"), default=None)
    p.add_argument("--seed", type=str, default=None, help="training seed(s), e.g. 0 or 0,1,2")
    p.add_argument("--dataset-seed", type=str, default=None, help="dataset seed(s)")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--grad-mode", type=str, default=None,
                   choices=[m.value for m in GradientMode])
    p.add_argument("--config", type=str, default=None, help="JSON config file")


def _load_file_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _merge_config(args) -> experiments.ExperimentConfig:
    """File values first, CLI flags override, defaults last."""
    file_cfg = _load_file_config(args.config) if args.config else {}
    train_cfg = dict(file_cfg.get("training", {}))
    if args.grad_mode:
        train_cfg["gradient_mode"] = args.grad_mode
    if getattr(args, "epochs", None) is not None:
        train_cfg["max_epochs"] = args.epochs
    if getattr(args, "patience", None) is not None:
        train_cfg["patience"] = args.patience
    training_config = TrainConfig(**train_cfg)

    def pick(flag, key, default, parse=lambda x: x):
        if flag is not None:
            return parse(flag)
        if key in file_cfg:
            value = file_cfg[key]
            return tuple(value) if isinstance(value, list) else value
        return default

    return experiments.ExperimentConfig(
        task=pick(args.task, "task", "task1"),
        models=pick(getattr(args, "model", None), "models",
                    ("sqsn", "bqsn", "mlp", "gscn"),
                    parse=lambda s: tuple(s.split(","))),
        layer_range=pick(getattr(args, "layers", None), "layer_range",
                         (1, 2, 3, 4, 5), parse=_parse_int_list),
        seeds=pick(args.seed, "seeds", (0, 1, 2, 3), parse=_parse_int_list),
        dataset_seeds=pick(args.dataset_seed, "dataset_seeds",
                           tuple(range(10)), parse=_parse_int_list),
        training=training_config,
        out_dir=pick(args.out, "out_dir", "results"),
        workers=pick(args.workers, "workers", 1),
    )


def cmd_gen_data(args) -> int:
    for ds_seed in _parse_int_list(args.dataset_seed or "0"):
        complex_, dataset, meta = experiments.make_dataset(
            args.task or "task1", ds_seed, n_signals=args.n_signals)
        out = Path(args.out or "data") / f"{args.task or 'task1'}-seed{ds_seed}"
        datasets.save_dataset(out, complex_, dataset, meta)
        print(f"wrote {out} (N+E+T={complex_.n_simplices}, "
              f"{len(dataset.signals)} signals)")
    return 0


def cmd_train(args) -> int:
    task = args.task or "task1"
    ds_seed = int(args.dataset_seed or 0)
    seed = int(args.seed or 0)
    layers = int(args.layers or 1)
    mode = GradientMode(args.grad_mode) if args.grad_mode else GradientMode.ADJOINT
    train_config = TrainConfig(gradient_mode=mode, seed=seed)
    if args.epochs is not None:
        train_config = replace(train_config, max_epochs=args.epochs)
    if args.patience is not None:
        train_config = replace(train_config, patience=args.patience)

    out = Path(args.out or "run")
    out.mkdir(parents=True, exist_ok=True)
    result = experiments.run_single(task, ds_seed, args.model, layers, seed,
                                    train_config, log_path=out / "log.csv")
    (out / "result.json").write_text(json.dumps({
        "task": task, "model": args.model, "layers": layers,
        "dataset_seed": ds_seed, "train_seed": seed,
        "test_acc": result.test_acc, "val_acc": result.val_acc,
        "n_params": result.n_params,
    }, indent=2))
    print(f"{args.model} layers={layers} dataset_seed={ds_seed} seed={seed}: "
          f"test_acc={result.test_acc:.4f} ({result.n_params} params)")
    return 0


def cmd_sweep(args) -> int:
    config = _merge_config(args)
    results = experiments.run_experiment(config)
    print(f"{len(results)} runs -> {config.out_dir}/runs.csv, summary.csv")
    return 0


def cmd_entropy(args) -> int:
    task = args.task or "task1"
    rows = experiments.run_entropy_analysis(
        task,
        dataset_seed=int(args.dataset_seed or 0),
        layer_range=_parse_int_list(args.layers or "1-5"),
        shots=args.shots,
        draws=args.draws,
        seed=int(args.seed or 0),
    )
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    experiments.write_entropy_csv(rows, out / "entropy.csv")
    print(f"entropy table -> {out / 'entropy.csv'}")
    return 0


def cmd_report(args) -> int:
    print(experiments.report(args.results))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qsimplicial",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate and serialize datasets")
    _add_common(p)
    p.add_argument("--n-signals", type=int, default=None)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train a single model")
    _add_common(p)
    p.add_argument("--model", required=True, choices=experiments.MODEL_NAMES)
    p.add_argument("--layers", type=str, default="1")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("sweep", help="grid sweep over models/layers/seeds")
    _add_common(p)
    p.add_argument("--model", type=str, default=None, help="comma-separated subset")
    p.add_argument("--layers", type=str, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("entropy", help="output-distribution entropy analysis")
    _add_common(p)
    p.add_argument("--layers", type=str, default="1-5")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--draws", type=int, default=experiments.DEFAULT_ENTROPY_DRAWS)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("report", help="print tables from a results directory")
    p.add_argument("--results", required=True)
    p.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
