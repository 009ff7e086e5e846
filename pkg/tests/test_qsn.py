import numpy as np
import pytest

from conftest import random_task1_complexes
from dense_oracle import circuit_unitary
from qsimplicial.quantum import Axis, GateDescriptor, basis_probabilities, init_zero
from qsimplicial.qsn import (
    InteractionPlan,
    LayerVariant,
    QsnModel,
    TermKind,
    bind_angles,
    compile_plan,
    compile_program,
    embed,
    encode,
    forward,
    init_model,
    interact,
    load_model,
    parameter_count,
    run_bound_program,
    save_model,
)
from qsimplicial.topology import build_incidence, build_laplacians


def make_plan(cx, variant=LayerVariant.SCHEMATIC):
    inc = build_incidence(cx)
    lap = build_laplacians(inc)
    return compile_plan(cx, lap, inc, variant)


def test_filled_triangle_plan(filled_triangle):
    plan = make_plan(filled_triangle)
    counts = plan.term_counts()
    assert counts[TermKind.NODE_NODE] == 3
    assert counts[TermKind.NODE_EDGE] == 6
    assert counts[TermKind.EDGE_EDGE_LOWER] == 3
    assert counts[TermKind.EDGE_EDGE_UPPER] == 3
    assert counts[TermKind.EDGE_TRIANGLE] == 3
    assert counts[TermKind.TRIANGLE_TRIANGLE] == 0
    assert len(plan.terms) == 18
    assert plan.params_per_layer == 25


def test_single_edge_plan(single_edge):
    plan = make_plan(single_edge)
    counts = plan.term_counts()
    assert counts[TermKind.NODE_NODE] == 1
    assert counts[TermKind.NODE_EDGE] == 2
    assert len(plan.terms) == 3
    assert plan.params_per_layer == 6


def test_base_variant_axes(filled_triangle):
    plan = make_plan(filled_triangle, LayerVariant.BASE)
    assert all(t.axes == (Axis.Z, Axis.Z) for t in plan.terms)
    assert plan.encoding_axes == (Axis.X,) * 7
    assert plan.embedding_axes == (Axis.Z,) * 7


def test_schematic_axes(filled_triangle):
    plan = make_plan(filled_triangle)
    assert plan.encoding_axes == (Axis.X,) * 3 + (Axis.Y,) * 3 + (Axis.Z,)
    assert plan.embedding_axes == plan.encoding_axes
    by_kind = {t.kind: t.axes for t in plan.terms}
    assert by_kind[TermKind.NODE_NODE] == (Axis.X, Axis.X)
    assert by_kind[TermKind.NODE_EDGE] == (Axis.X, Axis.Y)
    assert by_kind[TermKind.EDGE_EDGE_LOWER] == (Axis.Y, Axis.Y)
    assert by_kind[TermKind.EDGE_TRIANGLE] == (Axis.Y, Axis.Z)


def test_term_group_ordering(filled_triangle):
    plan = make_plan(filled_triangle)
    kinds = [t.kind for t in plan.terms]
    order = [TermKind.NODE_NODE, TermKind.NODE_EDGE, TermKind.EDGE_EDGE_LOWER,
             TermKind.EDGE_EDGE_UPPER, TermKind.EDGE_TRIANGLE, TermKind.TRIANGLE_TRIANGLE]
    assert kinds == sorted(kinds, key=order.index)
    # lexicographic (i, j) inside each group, and slots follow plan order
    for kind in set(kinds):
        pairs = [(t.qubit_i, t.qubit_j) for t in plan.terms if t.kind == kind]
        assert pairs == sorted(pairs)
    assert [t.param_slot for t in plan.terms] == list(
        range(plan.n_qubits, plan.n_qubits + len(plan.terms)))


def test_qubit_index_blocks(two_triangles):
    plan = make_plan(two_triangles)
    n, e = two_triangles.n_vertices, two_triangles.n_edges
    for t in plan.terms:
        if t.kind in (TermKind.NODE_NODE, TermKind.EDGE_EDGE_LOWER,
                      TermKind.EDGE_EDGE_UPPER, TermKind.TRIANGLE_TRIANGLE):
            assert t.qubit_i < t.qubit_j
        if t.kind == TermKind.NODE_EDGE:
            assert t.qubit_i < n <= t.qubit_j < n + e
        if t.kind == TermKind.EDGE_TRIANGLE:
            assert n <= t.qubit_i < n + e <= t.qubit_j


def test_parameter_count_examples(filled_triangle, single_edge):
    assert parameter_count(filled_triangle) == (12, 12, 1, 25)
    assert parameter_count(single_edge) == (5, 1, 0, 6)


def test_parameter_count_matches_plan_on_random_complexes():
    for cx in random_task1_complexes(30, seed=11):
        plan = make_plan(cx)
        p = parameter_count(cx)[3]
        assert p == plan.params_per_layer
        counts = plan.term_counts()
        assert counts[TermKind.NODE_EDGE] == 2 * cx.n_edges
        assert counts[TermKind.EDGE_TRIANGLE] == 3 * cx.n_triangles
        assert counts[TermKind.NODE_NODE] == cx.n_edges


def test_encode_zero_signal_identity(filled_triangle):
    plan = make_plan(filled_triangle)
    s = encode(init_zero(7), np.zeros(7), plan)
    assert s[0] == pytest.approx(1.0)


def test_encode_base_one_hot_flips(filled_triangle):
    plan = make_plan(filled_triangle, LayerVariant.BASE)
    sig = np.zeros(7)
    sig[1] = 1.0
    s = encode(init_zero(7), sig, plan)
    probs = basis_probabilities(s)
    assert probs[1 << (7 - 1 - 1)] == pytest.approx(1.0)


def test_encode_schematic_triangle_phase_only(filled_triangle):
    plan = make_plan(filled_triangle)
    sig = np.zeros(7)
    sig[6] = 0.7  # triangle qubit, z-encoded
    s = encode(init_zero(7), sig, plan)
    assert basis_probabilities(s)[0] == pytest.approx(1.0)


def test_encode_length_mismatch(filled_triangle):
    plan = make_plan(filled_triangle)
    with pytest.raises(ValueError):
        encode(init_zero(7), np.zeros(5), plan)


def test_embed_identity_and_reduction(single_edge):
    plan = make_plan(single_edge)
    s = embed(init_zero(3), np.zeros(plan.params_per_layer), plan)
    assert s[0] == pytest.approx(1.0)

    # base variant embedding is z-rotations: basis probabilities unchanged
    plan_b = make_plan(single_edge, LayerVariant.BASE)
    params = np.random.default_rng(0).normal(0, np.pi, plan_b.params_per_layer)
    s = embed(init_zero(3), params, plan_b)
    assert basis_probabilities(s)[0] == pytest.approx(1.0)


def test_interact_zero_identity(filled_triangle):
    plan = make_plan(filled_triangle)
    s = interact(init_zero(7), np.zeros(plan.params_per_layer), plan)
    assert s[0] == pytest.approx(1.0)


def test_interact_matches_dense_oracle(single_edge):
    rng = np.random.default_rng(13)
    for variant in LayerVariant:
        plan = make_plan(single_edge, variant)
        params = rng.normal(0, np.pi, plan.params_per_layer)
        state = init_zero(3)
        state = encode(state, rng.uniform(-1, 1, 3), plan)
        ref = state.copy()
        interact(state, params, plan)
        gates = [GateDescriptor("li", (t.qubit_i, t.qubit_j), t.axes,
                                params[t.param_slot]) for t in plan.terms]
        expected = circuit_unitary(3, gates) @ ref
        assert np.abs(state - expected).max() < 1e-10


def test_forward_identity_circuit(filled_triangle):
    plan = make_plan(filled_triangle)
    model = QsnModel(plan, 1, np.zeros((1, 25)))
    assert np.allclose(forward(model, np.zeros(7)), np.ones(7), atol=1e-12)


def test_forward_base_single_flip(filled_triangle):
    plan = make_plan(filled_triangle, LayerVariant.BASE)
    model = QsnModel(plan, 1, np.zeros((1, 25)))
    sig = np.zeros(7)
    sig[3] = 1.0
    out = forward(model, sig)
    expected = np.ones(7)
    expected[3] = -1.0
    assert np.allclose(out, expected, atol=1e-12)


def test_forward_outputs_bounded_and_deterministic():
    for cx in random_task1_complexes(3, seed=17):
        plan = make_plan(cx)
        rng = np.random.default_rng(0)
        model = init_model(plan, 3, rng)
        sig = rng.uniform(-1, 1, plan.n_qubits)
        out1 = forward(model, sig)
        out2 = forward(model, sig)
        assert np.array_equal(out1, out2)
        assert np.all(np.abs(out1) <= 1 + 1e-12)


def test_forward_equals_staged_layers(two_triangles):
    """The compiled program path must equal explicit encode/embed/interact."""
    for variant in LayerVariant:
        plan = make_plan(two_triangles, variant)
        rng = np.random.default_rng(23)
        model = init_model(plan, 2, rng)
        sig = rng.uniform(-1, 1, plan.n_qubits)
        state = init_zero(plan.n_qubits)
        for layer in range(2):
            encode(state, sig, plan)
            embed(state, model.layer_params[layer], plan)
            interact(state, model.layer_params[layer], plan)
        program = compile_program(plan, 2)
        amp = run_bound_program(program, bind_angles(program, sig, model.layer_params.ravel()))
        assert np.abs(state - amp).max() < 1e-12


def test_base_terms_commute(single_edge):
    plan = make_plan(single_edge, LayerVariant.BASE)
    rng = np.random.default_rng(29)
    params = rng.normal(0, np.pi, plan.params_per_layer)
    sig = rng.uniform(-1, 1, 3)
    state = encode(init_zero(3), sig, plan)
    ref = state.copy()
    interact(state, params, plan)

    permuted = InteractionPlan(
        n_qubits=plan.n_qubits,
        encoding_axes=plan.encoding_axes,
        embedding_axes=plan.embedding_axes,
        terms=tuple(reversed(plan.terms)),
        variant=plan.variant,
    )
    interact(ref, params, permuted)
    assert np.abs(state - ref).max() < 1e-10


def test_checkpoint_roundtrip(tmp_path, filled_triangle, two_triangles):
    plan = make_plan(filled_triangle)
    rng = np.random.default_rng(31)
    model = init_model(plan, 2, rng, fingerprint=filled_triangle.fingerprint())
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path, filled_triangle)
    assert loaded.layer_count == 2
    assert loaded.variant == model.variant
    assert np.allclose(loaded.layer_params, model.layer_params)
    with pytest.raises(ValueError):
        load_model(path, two_triangles)


def test_init_model_distribution():
    cxs = random_task1_complexes(1, seed=37)
    plan = make_plan(cxs[0])
    rng = np.random.default_rng(0)
    model = init_model(plan, 50, rng)
    draws = model.layer_params.ravel()
    assert abs(draws.std() - np.pi) / np.pi < 0.1
    assert abs(draws.mean()) < 0.2
