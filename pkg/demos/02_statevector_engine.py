"""The statevector engine: rotations, entangling gates, the two-qubit
learnable-interaction block, measurement, sampling, and entropy.

Run:  python demos/02_statevector_engine.py
"""

import numpy as np

from qsimplicial.quantum import (
    Axis,
    GateDescriptor,
    apply_cx,
    apply_li,
    apply_rotation,
    all_z_expectations,
    basis_probabilities,
    gates_to_text,
    init_zero,
    sample_shots,
    shannon_entropy,
)

# A Bell-like state from rotations + CX
state = init_zero(2)
apply_rotation(state, 0, Axis.Y, np.pi / 2)
apply_cx(state, 0, 1)
print("amplitudes:", np.round(state, 4))
print("probabilities:", np.round(basis_probabilities(state), 4))
print("<Z> per qubit:", np.round(all_z_expectations(state), 4))

# The learnable-interaction block couples two qubits through a CX-conjugated
# rotation; with both axes z it is a pure parity phase.
state = init_zero(2)
apply_rotation(state, 0, Axis.Y, np.pi / 2)
apply_li(state, 0, 1, Axis.Z, Axis.Z, np.pi / 3)
print("\nafter LI_zz(pi/3):", np.round(state, 4))

# Mixed axes apply two rotations of the same angle inside the CX sandwich.
state = init_zero(2)
apply_li(state, 0, 1, Axis.X, Axis.Y, 0.8)
print("after LI_xy(0.8) on |00>:", np.round(state, 4))

# Sampling and entropy of the outcome distribution
state = init_zero(3)
for q in range(3):
    apply_rotation(state, q, Axis.Y, np.pi / 2)
probs = basis_probabilities(state)
counts = sample_shots(probs, 10_000, np.random.default_rng(0))
print("\nuniform 3-qubit state:")
print("  exact entropy   =", round(shannon_entropy(probs), 4), "bits")
print("  sampled entropy =", round(shannon_entropy(counts / 10_000), 4),
      "bits from 10k shots")

# Circuits serialize to a plain-text listing for golden files / debugging.
gates = [
    GateDescriptor("rotation", (0,), (Axis.Y,), np.pi / 2),
    GateDescriptor("cx", (0, 1)),
    GateDescriptor("li", (0, 1), (Axis.Z, Axis.Z), np.pi / 3),
]
print("\ncircuit listing:")
print(gates_to_text(gates))
