"""Train a small quantum model end to end on a curl-detection dataset and
compare the three gradient engines on the way.

Takes a couple of minutes on a laptop core.
Run:  python demos/04_train_small_model.py
"""

import numpy as np

from qsimplicial.datasets import Task1Config, generate_task1, normalize_dataset
from qsimplicial.qsn import LayerVariant, compile_plan, init_model
from qsimplicial.topology import build_incidence, build_laplacians
from qsimplicial.training import (
    GradientMode,
    QsnClassifier,
    TrainConfig,
    evaluate,
    quantum_gradient,
    train,
    zero_head,
)

rng = np.random.default_rng(9)
complex_, dataset = generate_task1(Task1Config(signals_per_dataset=300, seed=9), rng)
dataset = normalize_dataset(dataset)
print(f"complex: {complex_.n_vertices} vertices, {complex_.n_edges} edges, "
      f"{complex_.n_triangles} triangle(s); {len(dataset.signals)} signals")

inc = build_incidence(complex_)
lap = build_laplacians(inc)
plan = compile_plan(complex_, lap, inc, LayerVariant.SCHEMATIC)
model = init_model(plan, layer_count=2, rng=np.random.default_rng(0))
head = zero_head(2, plan.n_qubits)

# The three gradient routes agree: the shift rule and the reverse-mode sweep
# are both exact, finite differences approximate them.
sig, label = dataset.signals[0], int(dataset.labels[0])
probe_head = zero_head(2, plan.n_qubits)
probe_head.weights += 0.3
ps = quantum_gradient(model, probe_head, sig, label, GradientMode.PARAMETER_SHIFT)
fd = quantum_gradient(model, probe_head, sig, label, GradientMode.FINITE_DIFFERENCE)
aj = quantum_gradient(model, probe_head, sig, label, GradientMode.ADJOINT)
print("max |shift - finite difference| =", f"{np.abs(ps - fd).max():.2e}")
print("max |shift - adjoint|           =", f"{np.abs(ps - aj).max():.2e}")

classifier = QsnClassifier(model, head, GradientMode.ADJOINT)
config = TrainConfig(max_epochs=30, patience=30, seed=0)
result = train(classifier, dataset, config)
print(f"\ntrained {result.epochs_run} epochs "
      f"(best validation at epoch {result.best_epoch})")
print("test accuracy:", round(evaluate(classifier, dataset, "test"), 3))
