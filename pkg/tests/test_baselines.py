import numpy as np
import pytest

from conftest import random_task1_complexes
from qsimplicial.baselines import (
    ComplexOperators,
    GscnFamily,
    MlpFamily,
    build_gscn_classifier,
    build_mlp_classifier,
    build_operators,
    gscn_forward,
    init_gscn_layer,
    match_parameter_budget,
    mlp_forward,
)
from qsimplicial.topology import build_incidence, build_laplacians


def make_ops(cx, j=1):
    inc = build_incidence(cx)
    lap = build_laplacians(inc)
    return build_operators(cx, lap, inc, j)


def test_gscn_zero_weights(two_triangles):
    ops = make_ops(two_triangles)
    layer = init_gscn_layer(1, 2, 1, np.random.default_rng(0))
    layer.w_down_same[:] = 0
    layer.w_down_cross[:] = 0
    layer.w_up_same[:] = 0
    layer.w_up_cross[:] = 0
    layer.w_harm[:] = 0
    z = np.random.default_rng(1).normal(size=(two_triangles.n_simplices, 1))
    out = gscn_forward([layer], ops, z)
    assert np.all(out == 0)  # tanh(0)


def test_gscn_single_term_reduction(two_triangles):
    """Only the p=1 lower same-order weight at identity, linear nonlinearity:
    the node block output is L0 @ Z0."""
    ops = make_ops(two_triangles)
    layer = init_gscn_layer(1, 1, 1, np.random.default_rng(0))
    layer.w_down_same[:] = 0
    layer.w_down_cross[:] = 0
    layer.w_up_same[:] = 0
    layer.w_up_cross[:] = 0
    layer.w_harm[:] = 0
    layer.w_down_same[0] = np.eye(1)
    rng = np.random.default_rng(2)
    z = rng.normal(size=(two_triangles.n_simplices, 1))
    out = gscn_forward([layer], ops, z, nonlinearity="linear")
    n = two_triangles.n_vertices
    lap = build_laplacians(build_incidence(two_triangles))
    assert np.allclose(out[:n], lap.l0 @ z[:n])


def straight_line_gscn(cx, ops, layers, z, nonlinearity="tanh"):
    """Independent re-implementation of the three layer equations, written
    directly from the displayed sums (no code shared with the library path)."""
    n, e, t = cx.n_vertices, cx.n_edges, cx.n_triangles
    inc = build_incidence(cx)
    lap = build_laplacians(inc)
    from qsimplicial.topology import harmonic_projector
    q0, q1, q2 = (harmonic_projector(lap.l0), harmonic_projector(lap.l1),
                  harmonic_projector(lap.l2))
    z0, z1, z2 = z[:n], z[n:n + e], z[n + e:]
    for layer in layers:
        j = layer.w_down_same.shape[0]
        a0 = q0 @ z0 @ layer.w_harm
        a1 = q1 @ z1 @ layer.w_harm
        a2 = q2 @ z2 @ layer.w_harm
        for p in range(1, j + 1):
            a0 = a0 + np.linalg.matrix_power(lap.l0, p) @ z0 @ layer.w_down_same[p - 1]
            a1 = a1 + np.linalg.matrix_power(lap.l1_down, p) @ z1 @ layer.w_down_same[p - 1]
            a1 = a1 + np.linalg.matrix_power(lap.l1_up, p) @ z1 @ layer.w_up_same[p - 1]
            a2 = a2 + np.linalg.matrix_power(lap.l2, p) @ z2 @ layer.w_up_same[p - 1]
        for p in range(0, j + 1):
            a0 = a0 + np.linalg.matrix_power(lap.l0, p) @ inc.b1 @ z1 @ layer.w_down_cross[p]
            a1 = a1 + np.linalg.matrix_power(lap.l1_down, p) @ inc.b1.T @ z0 @ layer.w_down_cross[p]
            a1 = a1 + np.linalg.matrix_power(lap.l1_up, p) @ inc.b2 @ z2 @ layer.w_up_cross[p]
            a2 = a2 + np.linalg.matrix_power(lap.l2, p) @ inc.b2.T @ z1 @ layer.w_up_cross[p]
        if nonlinearity == "tanh":
            z0, z1, z2 = np.tanh(a0), np.tanh(a1), np.tanh(a2)
        else:
            z0, z1, z2 = a0, a1, a2
    return np.concatenate([z0, z1, z2], axis=0)


def test_gscn_matches_straight_line_reimplementation():
    for seed, cx in enumerate(random_task1_complexes(3, seed=41)):
        rng = np.random.default_rng(seed)
        ops = make_ops(cx, j=2)
        layers = [init_gscn_layer(1, 3, 2, rng), init_gscn_layer(3, 2, 2, rng)]
        z = rng.normal(size=(cx.n_simplices, 1))
        expected = straight_line_gscn(cx, ops, layers, z)
        got = gscn_forward(layers, ops, z)
        assert np.abs(got - expected).max() < 1e-10


def test_gscn_permutation_consistency(two_triangles):
    """Permuting simplex indices (operators, inputs) permutes outputs."""
    rng = np.random.default_rng(3)
    cx = two_triangles
    n, e, t = cx.n_vertices, cx.n_edges, cx.n_triangles
    ops1 = make_ops(cx)
    p0 = rng.permutation(n)
    p1 = rng.permutation(e)
    p2 = rng.permutation(t)

    def permute(mat, rows, cols):
        return mat[np.ix_(rows, cols)]

    ops2 = ComplexOperators(
        b1=permute(ops1.b1, p0, p1),
        b2=permute(ops1.b2, p1, p2),
        l0_pows=tuple(permute(m, p0, p0) for m in ops1.l0_pows),
        l1d_pows=tuple(permute(m, p1, p1) for m in ops1.l1d_pows),
        l1u_pows=tuple(permute(m, p1, p1) for m in ops1.l1u_pows),
        l2_pows=tuple(permute(m, p2, p2) for m in ops1.l2_pows),
        q0=permute(ops1.q0, p0, p0),
        q1=permute(ops1.q1, p1, p1),
        q2=permute(ops1.q2, p2, p2),
        dims=ops1.dims,
    )
    # ops2 rows/cols are indexed by the NEW positions: new index i holds old
    # simplex p[i], i.e. z2[new] = z1[p[new]]
    layers = [init_gscn_layer(1, 2, 1, np.random.default_rng(7))]
    z = rng.normal(size=(cx.n_simplices, 1))
    z2 = np.concatenate([z[:n][p0], z[n:n + e][p1], z[n + e:][p2]], axis=0)
    out1 = gscn_forward(layers, ops1, z)
    out2 = gscn_forward(layers, ops2, z2)
    expected = np.concatenate([out1[:n][p0], out1[n:n + e][p1], out1[n + e:][p2]], axis=0)
    assert np.abs(out2 - expected).max() < 1e-10


def test_gscn_gradient_matches_finite_difference(two_triangles):
    rng = np.random.default_rng(5)
    clf = build_gscn_classifier(two_triangles, depth=2, width=2, n_classes=2,
                                rng=rng)
    x = rng.normal(size=two_triangles.n_simplices)
    label = 1
    loss, grad, _ = clf.loss_and_grad(x, label)
    params = clf.get_params()
    h = 1e-6
    for idx in range(0, len(params), 7):
        shifted = params.copy()
        shifted[idx] += h
        clf.set_params(shifted)
        lp = clf.loss_and_grad(x, label)[0]
        shifted[idx] -= 2 * h
        clf.set_params(shifted)
        lm = clf.loss_and_grad(x, label)[0]
        clf.set_params(params)
        fd = (lp - lm) / (2 * h)
        assert grad[idx] == pytest.approx(fd, abs=2e-5)


def test_mlp_identity_and_zero():
    clf = build_mlp_classifier(3, [], 3, np.random.default_rng(0))
    clf.weights[0] = np.eye(3)
    clf.biases[0] = np.zeros(3)
    x = np.array([0.3, -1.2, 0.5])
    assert np.allclose(mlp_forward(clf, x), x)
    clf.weights[0] = np.zeros((3, 3))
    clf.biases[0] = np.array([1.0, 2.0, 3.0])
    assert np.allclose(mlp_forward(clf, x), [1.0, 2.0, 3.0])


def test_mlp_two_layer_hand_computed():
    clf = build_mlp_classifier(2, [2], 2, np.random.default_rng(0))
    clf.weights[0] = np.array([[1.0, 0.0], [0.0, -1.0]])
    clf.biases[0] = np.array([0.0, 0.5])
    clf.weights[1] = np.array([[2.0, 0.0], [0.0, 1.0]])
    clf.biases[1] = np.array([-1.0, 0.0])
    x = np.array([0.5, 1.0])
    hidden = np.tanh([0.5, -0.5])
    expected = [2 * hidden[0] - 1, hidden[1]]
    assert np.allclose(mlp_forward(clf, x), expected)


def test_mlp_gradient_matches_finite_difference():
    rng = np.random.default_rng(6)
    clf = build_mlp_classifier(4, [5, 3], 2, rng)
    x = rng.normal(size=4)
    loss, grad, _ = clf.loss_and_grad(x, 0)
    params = clf.get_params()
    h = 1e-6
    for idx in range(0, len(params), 5):
        shifted = params.copy()
        shifted[idx] += h
        clf.set_params(shifted)
        lp = clf.loss_and_grad(x, 0)[0]
        shifted[idx] -= 2 * h
        clf.set_params(shifted)
        lm = clf.loss_and_grad(x, 0)[0]
        clf.set_params(params)
        assert grad[idx] == pytest.approx((lp - lm) / (2 * h), abs=2e-5)


def test_budget_matcher_exact_counts():
    fam = MlpFamily(in_dim=10, n_classes=2, depth=2)
    widths = match_parameter_budget(150, fam)
    count = fam.param_count(widths[0])
    assert abs(count - 150) <= 0.10 * 150

    # the returned width's count must equal an independent per-tensor tally
    clf = build_mlp_classifier(10, widths, 2, np.random.default_rng(0))
    assert clf.n_params == count


def test_budget_matcher_gscn_tally(two_triangles):
    fam = GscnFamily(n_simplices=two_triangles.n_simplices, n_classes=2, depth=2)
    widths = match_parameter_budget(200, fam)
    clf = build_gscn_classifier(two_triangles, 2, widths[0], 2,
                                np.random.default_rng(0))
    assert clf.n_params == fam.param_count(widths[0])


def test_budget_matcher_below_minimum_errors():
    fam = MlpFamily(in_dim=50, n_classes=10, depth=3)
    with pytest.raises(ValueError):
        match_parameter_budget(5, fam)


def test_budget_matcher_monotone():
    fam = MlpFamily(in_dim=8, n_classes=2, depth=1)
    counts = []
    for target in range(20, 400, 10):
        widths = match_parameter_budget(target, fam)
        counts.append(fam.param_count(widths[0]))
    assert counts == sorted(counts)
