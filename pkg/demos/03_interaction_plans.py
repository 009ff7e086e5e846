"""How a complex compiles into a quantum layer plan: term enumeration from
the Hodge operators, axis assignment per variant, parameter budget, and a
forward pass.

Run:  python demos/03_interaction_plans.py
"""

import numpy as np

from qsimplicial.qsn import LayerVariant, compile_plan, forward, init_model, parameter_count
from qsimplicial.topology import SimplicialComplex2, build_incidence, build_laplacians

complex_ = SimplicialComplex2(3, ((0, 1), (0, 2), (1, 2)), ((0, 1, 2),))
inc = build_incidence(complex_)
lap = build_laplacians(inc)

for variant in (LayerVariant.BASE, LayerVariant.SCHEMATIC):
    plan = compile_plan(complex_, lap, inc, variant)
    print(f"=== {variant.value} layer on the filled triangle ===")
    print("qubits:", plan.n_qubits,
          "(vertices 0-2, edges 3-5, triangle 6)")
    print("encoding axes: ", [a.name for a in plan.encoding_axes])
    print("embedding axes:", [a.name for a in plan.embedding_axes])
    print(f"{len(plan.terms)} interaction terms:")
    for t in plan.terms:
        print(f"  {t.kind.value:18s} qubits ({t.qubit_i}, {t.qubit_j}) "
              f"axes ({t.axes[0].name}, {t.axes[1].name}) slot {t.param_slot}")
    print()

p_n, p_e, p_t, p = parameter_count(complex_)
print(f"per-layer parameter budget: nodes {p_n} + edges {p_e} + triangles {p_t} = {p}")

# A 2-layer model with data reuploading; measurements are <Z> per simplex.
rng = np.random.default_rng(1)
plan = compile_plan(complex_, lap, inc, LayerVariant.SCHEMATIC)
model = init_model(plan, layer_count=2, rng=rng)
signal = rng.uniform(-1, 1, plan.n_qubits)
print("\nsignal:      ", np.round(signal, 3))
print("measurements:", np.round(forward(model, signal), 3))
