"""Compilation of a simplicial complex into quantum simplicial layers.

A layer acts on one qubit per simplex (nodes first, then edges, then
triangles) and consists of three stages: input encoding rotations, learnable
per-qubit embedding rotations, and learnable two-qubit interaction gates
enumerated from the nonzero patterns of the Hodge operators.  Two axis
assignments are supported: the Base variant (X encode, Z embed, ZZ
interactions, Ising-style) and the Schematic variant (one axis per simplicial
order: X nodes, Y edges, Z triangles).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .quantum import (
    OP_CX,
    OP_ROT,
    OP_ZZ,
    Axis,
    _f8,
    _run_program,
    all_z_expectations,
    init_zero,
)
from .topology import IncidenceMatrices, Laplacians, SimplicialComplex2

CHECKPOINT_VERSION = 1


class LayerVariant(Enum):
    BASE = "base"
    SCHEMATIC = "schematic"


class TermKind(Enum):
    NODE_NODE = "node_node"
    NODE_EDGE = "node_edge"
    EDGE_EDGE_LOWER = "edge_edge_lower"
    EDGE_EDGE_UPPER = "edge_edge_upper"
    EDGE_TRIANGLE = "edge_triangle"
    TRIANGLE_TRIANGLE = "triangle_triangle"


# per-kind interaction axes (k, p) for the schematic variant
_SCHEMATIC_TERM_AXES = {
    TermKind.NODE_NODE: (Axis.X, Axis.X),
    TermKind.NODE_EDGE: (Axis.X, Axis.Y),
    TermKind.EDGE_EDGE_LOWER: (Axis.Y, Axis.Y),
    TermKind.EDGE_EDGE_UPPER: (Axis.Y, Axis.Y),
    TermKind.EDGE_TRIANGLE: (Axis.Y, Axis.Z),
    TermKind.TRIANGLE_TRIANGLE: (Axis.Z, Axis.Z),
}

_TERM_ORDER = (
    TermKind.NODE_NODE,
    TermKind.NODE_EDGE,
    TermKind.EDGE_EDGE_LOWER,
    TermKind.EDGE_EDGE_UPPER,
    TermKind.EDGE_TRIANGLE,
    TermKind.TRIANGLE_TRIANGLE,
)


@dataclass(frozen=True)
class InteractionTerm:
    kind: TermKind
    qubit_i: int
    qubit_j: int
    axes: tuple[Axis, Axis]
    param_slot: int


@dataclass(frozen=True)
class InteractionPlan:
    """Deterministic gate plan of one layer on a fixed complex."""

    n_qubits: int
    encoding_axes: tuple[Axis, ...]
    embedding_axes: tuple[Axis, ...]
    terms: tuple[InteractionTerm, ...]
    variant: LayerVariant

    @property
    def params_per_layer(self) -> int:
        return self.n_qubits + len(self.terms)

    def term_counts(self) -> dict[TermKind, int]:
        counts = {kind: 0 for kind in TermKind}
        for t in self.terms:
            counts[t.kind] += 1
        return counts


def _offdiag_pairs(mat: np.ndarray):
    """(i, j) with i < j and mat[i, j] != 0, in lexicographic order."""
    m = np.asarray(mat)
    for i in range(m.shape[0]):
        for j in range(i + 1, m.shape[1]):
            if m[i, j] != 0:
                yield i, j


def _incidence_pairs(mat: np.ndarray):
    """(i, j) with mat[i, j] != 0, in lexicographic order."""
    m = np.asarray(mat)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            if m[i, j] != 0:
                yield i, j


def compile_plan(
    complex_: SimplicialComplex2,
    lap: Laplacians,
    inc: IncidenceMatrices,
    variant: LayerVariant,
) -> InteractionPlan:
    """Enumerate interaction terms from the Hodge operators' sparsity patterns.

    Term groups appear in the order node-node, node-edge, edge-edge (lower),
    edge-edge (upper), edge-triangle, triangle-triangle, each sorted
    lexicographically; one independent parameter per term, slotted after the
    per-qubit embedding parameters.
    """
    n, e = complex_.n_vertices, complex_.n_edges
    nq = complex_.n_simplices

    group_pairs = {
        TermKind.NODE_NODE: [(i, j) for i, j in _offdiag_pairs(lap.l0)],
        TermKind.NODE_EDGE: [(i, n + j) for i, j in _incidence_pairs(inc.b1)],
        TermKind.EDGE_EDGE_LOWER: [(n + i, n + j) for i, j in _offdiag_pairs(lap.l1_down)],
        TermKind.EDGE_EDGE_UPPER: [(n + i, n + j) for i, j in _offdiag_pairs(lap.l1_up)],
        TermKind.EDGE_TRIANGLE: [(n + i, n + e + j) for i, j in _incidence_pairs(inc.b2)],
        TermKind.TRIANGLE_TRIANGLE: [(n + e + i, n + e + j) for i, j in _offdiag_pairs(lap.l2)],
    }

    if variant is LayerVariant.BASE:
        encoding = (Axis.X,) * nq
        embedding = (Axis.Z,) * nq
        term_axes = {kind: (Axis.Z, Axis.Z) for kind in TermKind}
    else:
        per_order = [Axis.X] * n + [Axis.Y] * e + [Axis.Z] * complex_.n_triangles
        encoding = tuple(per_order)
        embedding = tuple(per_order)
        term_axes = _SCHEMATIC_TERM_AXES

    terms = []
    slot = nq
    for kind in _TERM_ORDER:
        for qi, qj in group_pairs[kind]:
            terms.append(InteractionTerm(kind, qi, qj, term_axes[kind], slot))
            slot += 1

    return InteractionPlan(
        n_qubits=nq,
        encoding_axes=encoding,
        embedding_axes=embedding,
        terms=tuple(terms),
        variant=variant,
    )


def parameter_count(complex_: SimplicialComplex2) -> tuple[int, int, int, int]:
    """Per-layer parameter budget (p_n, p_e, p_t, p) from the operator
    sparsity patterns; p equals the compiled plan's params_per_layer."""
    from .topology import build_incidence, build_laplacians

    inc = build_incidence(complex_)
    lap = build_laplacians(inc)
    n, e, t = complex_.n_vertices, complex_.n_edges, complex_.n_triangles

    def offdiag_nnz(m):
        return sum(1 for _ in _offdiag_pairs(m))

    def nnz(m):
        return int(np.count_nonzero(m))

    p_n = n + offdiag_nnz(lap.l0) + nnz(inc.b1)
    p_e = e + offdiag_nnz(lap.l1_down) + offdiag_nnz(lap.l1_up) + nnz(inc.b2)
    p_t = t + offdiag_nnz(lap.l2)
    return p_n, p_e, p_t, p_n + p_e + p_t


@dataclass
class QsnModel:
    """A stack of identical-structure layers with per-layer parameters.

    layer_params has shape (layer_count, params_per_layer): embedding angles
    first (qubit order), then one slot per interaction term (plan order).
    """

    plan: InteractionPlan
    layer_count: int
    layer_params: np.ndarray
    fingerprint: str = ""

    def __post_init__(self):
        expected = (self.layer_count, self.plan.params_per_layer)
        self.layer_params = np.asarray(self.layer_params, dtype=float)
        if self.layer_params.shape != expected:
            raise ValueError(
                f"layer_params shape {self.layer_params.shape} != {expected}"
            )
        if not np.all(np.isfinite(self.layer_params)):
            raise ValueError("layer parameters must be finite")

    @property
    def variant(self) -> LayerVariant:
        return self.plan.variant

    @property
    def n_quantum_params(self) -> int:
        return self.layer_count * self.plan.params_per_layer


def init_model(
    plan: InteractionPlan,
    layer_count: int,
    rng: np.random.Generator,
    fingerprint: str = "",
) -> QsnModel:
    """Fresh model with angles drawn i.i.d. from normal(0, pi)."""
    params = rng.normal(0.0, np.pi, size=(layer_count, plan.params_per_layer))
    return QsnModel(plan=plan, layer_count=layer_count, layer_params=params,
                    fingerprint=fingerprint)


# ---------------------------------------------------------------------------
# compiled circuit programs
#
# A static program fixes opcodes, qubits, axes and parameter slots for the
# whole multi-layer circuit; binding a signal and a parameter matrix fills in
# the angle array.  feature[g] >= 0 marks encoding gates fed by that signal
# component; param[g] >= 0 marks learnable gates reading the flattened
# parameter matrix.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircuitProgram:
    n_qubits: int
    n_params: int
    ops: np.ndarray      # int8  (G,)
    q0: np.ndarray       # int32 (G,)
    q1: np.ndarray       # int32 (G,)
    axes: np.ndarray     # int8  (G,)
    param: np.ndarray    # int32 (G,), -1 for fixed gates
    feature: np.ndarray  # int32 (G,), -1 for non-encoding gates

    @property
    def n_gates(self) -> int:
        return len(self.ops)


@lru_cache(maxsize=64)
def compile_program(plan: InteractionPlan, layer_count: int) -> CircuitProgram:
    """Flatten ``layer_count`` stacked layers into opcode arrays (cached)."""
    ops, q0, q1, axes, param, feature = [], [], [], [], [], []

    def push(op, a, b, ax, pr, ft):
        ops.append(op)
        q0.append(a)
        q1.append(b)
        axes.append(ax)
        param.append(pr)
        feature.append(ft)

    p = plan.params_per_layer
    for layer in range(layer_count):
        base = layer * p
        for q in range(plan.n_qubits):
            push(OP_ROT, q, -1, int(plan.encoding_axes[q]), -1, q)
        for q in range(plan.n_qubits):
            push(OP_ROT, q, -1, int(plan.embedding_axes[q]), base + q, -1)
        for term in plan.terms:
            slot = base + term.param_slot
            k, pp = term.axes
            if k == Axis.Z and pp == Axis.Z:
                push(OP_ZZ, term.qubit_i, term.qubit_j, 0, slot, -1)
            else:
                push(OP_CX, term.qubit_i, term.qubit_j, 0, -1, -1)
                push(OP_ROT, term.qubit_j, -1, int(k), slot, -1)
                if pp != k:
                    push(OP_ROT, term.qubit_j, -1, int(pp), slot, -1)
                push(OP_CX, term.qubit_i, term.qubit_j, 0, -1, -1)

    return CircuitProgram(
        n_qubits=plan.n_qubits,
        n_params=layer_count * p,
        ops=np.array(ops, dtype=np.int8),
        q0=np.array(q0, dtype=np.int32),
        q1=np.array(q1, dtype=np.int32),
        axes=np.array(axes, dtype=np.int8),
        param=np.array(param, dtype=np.int32),
        feature=np.array(feature, dtype=np.int32),
    )


def bind_angles(program: CircuitProgram, signal: np.ndarray, flat_params: np.ndarray) -> np.ndarray:
    """Angle array for one (signal, parameters) pair: encoding gates rotate by
    pi * s_i, learnable gates read their parameter slot."""
    angles = np.zeros(program.n_gates)
    enc = program.feature >= 0
    angles[enc] = np.pi * np.asarray(signal, dtype=float)[program.feature[enc]]
    learn = program.param >= 0
    angles[learn] = np.asarray(flat_params, dtype=float)[program.param[learn]]
    return angles


def run_bound_program(program: CircuitProgram, angles: np.ndarray) -> np.ndarray:
    """Evolve |0...0> through the program; returns the final statevector."""
    amp = init_zero(program.n_qubits)
    _run_program(_f8(amp), program.n_qubits, program.ops, program.q0, program.q1,
                 program.axes, angles)
    return amp


# spec-level stage operations (single layer, explicit state) -----------------

def _check_signal(plan: InteractionPlan, signal: np.ndarray) -> np.ndarray:
    signal = np.asarray(signal, dtype=float)
    if signal.shape != (plan.n_qubits,):
        raise ValueError(f"signal must have length {plan.n_qubits}")
    return signal


def encode(state: np.ndarray, signal: np.ndarray, plan: InteractionPlan) -> np.ndarray:
    """Rotate qubit i by pi * s_i about its encoding axis."""
    from .quantum import apply_rotation

    signal = _check_signal(plan, signal)
    for q in range(plan.n_qubits):
        apply_rotation(state, q, plan.encoding_axes[q], np.pi * signal[q])
    return state


def embed(state: np.ndarray, layer_params: np.ndarray, plan: InteractionPlan) -> np.ndarray:
    """Rotate qubit i by its learnable embedding angle."""
    from .quantum import apply_rotation

    layer_params = np.asarray(layer_params, dtype=float)
    if layer_params.shape != (plan.params_per_layer,):
        raise ValueError(f"layer params must have length {plan.params_per_layer}")
    for q in range(plan.n_qubits):
        apply_rotation(state, q, plan.embedding_axes[q], layer_params[q])
    return state


def interact(state: np.ndarray, layer_params: np.ndarray, plan: InteractionPlan) -> np.ndarray:
    """Apply the plan's interaction gates in order, one parameter per term."""
    from .quantum import apply_li

    layer_params = np.asarray(layer_params, dtype=float)
    if layer_params.shape != (plan.params_per_layer,):
        raise ValueError(f"layer params must have length {plan.params_per_layer}")
    for term in plan.terms:
        apply_li(state, term.qubit_i, term.qubit_j, term.axes[0], term.axes[1],
                 layer_params[term.param_slot])
    return state


def forward(model: QsnModel, signal: np.ndarray) -> np.ndarray:
    """Full multi-layer evaluation: initialize once, per layer encode / embed /
    interact (data reuploading), measure <Z> per qubit once at the end."""
    signal = _check_signal(model.plan, signal)
    program = compile_program(model.plan, model.layer_count)
    angles = bind_angles(program, signal, model.layer_params.ravel())
    amp = run_bound_program(program, angles)
    return all_z_expectations(amp)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_model(model: QsnModel, path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "variant": model.variant.value,
        "layer_count": model.layer_count,
        "fingerprint": model.fingerprint,
        "layer_params": model.layer_params.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_model(path, complex_: SimplicialComplex2) -> QsnModel:
    """Load a checkpoint, rebuilding the plan; refuses a mismatched complex."""
    from .topology import build_incidence, build_laplacians

    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    fingerprint = complex_.fingerprint()
    if payload["fingerprint"] != fingerprint:
        raise ValueError(
            f"checkpoint was trained on a different complex "
            f"({payload['fingerprint']} != {fingerprint})"
        )
    inc = build_incidence(complex_)
    lap = build_laplacians(inc)
    plan = compile_plan(complex_, lap, inc, LayerVariant(payload["variant"]))
    return QsnModel(
        plan=plan,
        layer_count=int(payload["layer_count"]),
        layer_params=np.array(payload["layer_params"], dtype=float),
        fingerprint=payload["fingerprint"],
    )
