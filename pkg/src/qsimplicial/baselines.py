"""Classical comparison models trained with the same optimizer stack:

* a generalized simplicial convolutional network (GSCN) whose layers apply a
  bank of Hodge-Laplacian polynomial filters with lower/upper/harmonic
  branches and incidence-lifted cross-order terms, and
* a plain MLP on the concatenated simplicial signal.

Both end in the same affine-softmax readout used by the quantum models, and
both expose analytic gradients (verified against finite differences in the
test suite).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import (
    IncidenceMatrices,
    Laplacians,
    SimplicialComplex2,
    build_incidence,
    build_laplacians,
    harmonic_projector,
)
from .training import _loss_and_readout_grads


@dataclass(frozen=True)
class ComplexOperators:
    """Precomputed matrix powers and projectors consumed by GSCN layers."""

    b1: np.ndarray
    b2: np.ndarray
    l0_pows: tuple[np.ndarray, ...]   # index p = 0..J
    l1d_pows: tuple[np.ndarray, ...]
    l1u_pows: tuple[np.ndarray, ...]
    l2_pows: tuple[np.ndarray, ...]
    q0: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    dims: tuple[int, int, int]

    @property
    def filter_order(self) -> int:
        return len(self.l0_pows) - 1


def build_operators(complex_: SimplicialComplex2, lap: Laplacians,
                    inc: IncidenceMatrices, filter_order: int = 1) -> ComplexOperators:
    def powers(m, j):
        out = [np.eye(m.shape[0])]
        for _ in range(j):
            out.append(out[-1] @ m)
        return tuple(out)

    return ComplexOperators(
        b1=inc.b1,
        b2=inc.b2,
        l0_pows=powers(lap.l0, filter_order),
        l1d_pows=powers(lap.l1_down, filter_order),
        l1u_pows=powers(lap.l1_up, filter_order),
        l2_pows=powers(lap.l2, filter_order),
        q0=harmonic_projector(lap.l0),
        q1=harmonic_projector(lap.l1),
        q2=harmonic_projector(lap.l2),
        dims=(complex_.n_vertices, complex_.n_edges, complex_.n_triangles),
    )


@dataclass
class GscnLayer:
    """One filter bank: lower/upper same-order branches (p = 1..J), incidence
    cross-order branches (p = 0..J), and a harmonic branch, weights shared
    across simplicial orders."""

    w_down_same: np.ndarray   # (J, F_in, F_out)
    w_down_cross: np.ndarray  # (J+1, F_in, F_out)
    w_up_same: np.ndarray     # (J, F_in, F_out)
    w_up_cross: np.ndarray    # (J+1, F_in, F_out)
    w_harm: np.ndarray        # (F_in, F_out)

    @property
    def n_params(self) -> int:
        return (self.w_down_same.size + self.w_down_cross.size
                + self.w_up_same.size + self.w_up_cross.size + self.w_harm.size)


def init_gscn_layer(f_in: int, f_out: int, filter_order: int,
                    rng: np.random.Generator) -> GscnLayer:
    scale = 1.0 / np.sqrt(max(f_in, 1))
    j = filter_order
    return GscnLayer(
        w_down_same=rng.normal(0, scale, (j, f_in, f_out)),
        w_down_cross=rng.normal(0, scale, (j + 1, f_in, f_out)),
        w_up_same=rng.normal(0, scale, (j, f_in, f_out)),
        w_up_cross=rng.normal(0, scale, (j + 1, f_in, f_out)),
        w_harm=rng.normal(0, scale, (f_in, f_out)),
    )


def _layer_preactivation(layer: GscnLayer, ops: ComplexOperators, z0, z1, z2):
    j = ops.filter_order
    b1z1 = ops.b1 @ z1
    b1tz0 = ops.b1.T @ z0
    b2z2 = ops.b2 @ z2
    b2tz1 = ops.b2.T @ z1
    a0 = ops.q0 @ z0 @ layer.w_harm
    a1 = ops.q1 @ z1 @ layer.w_harm
    a2 = ops.q2 @ z2 @ layer.w_harm
    for p in range(1, j + 1):
        a0 = a0 + ops.l0_pows[p] @ z0 @ layer.w_down_same[p - 1]
        a1 = a1 + ops.l1d_pows[p] @ z1 @ layer.w_down_same[p - 1]
        a1 = a1 + ops.l1u_pows[p] @ z1 @ layer.w_up_same[p - 1]
        a2 = a2 + ops.l2_pows[p] @ z2 @ layer.w_up_same[p - 1]
    for p in range(j + 1):
        a0 = a0 + ops.l0_pows[p] @ b1z1 @ layer.w_down_cross[p]
        a1 = a1 + ops.l1d_pows[p] @ b1tz0 @ layer.w_down_cross[p]
        a1 = a1 + ops.l1u_pows[p] @ b2z2 @ layer.w_up_cross[p]
        a2 = a2 + ops.l2_pows[p] @ b2tz1 @ layer.w_up_cross[p]
    return a0, a1, a2


def gscn_forward(layers, ops: ComplexOperators, z_in: np.ndarray,
                 nonlinearity: str = "tanh") -> np.ndarray:
    """Run the layer stack on a stacked signal matrix (N+E+T, F_0)."""
    n, e, t = ops.dims
    z0, z1, z2 = z_in[:n], z_in[n:n + e], z_in[n + e:]
    for layer in layers:
        a0, a1, a2 = _layer_preactivation(layer, ops, z0, z1, z2)
        if nonlinearity == "tanh":
            z0, z1, z2 = np.tanh(a0), np.tanh(a1), np.tanh(a2)
        elif nonlinearity == "linear":
            z0, z1, z2 = a0, a1, a2
        else:
            raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
    return np.concatenate([z0, z1, z2], axis=0)


class GscnClassifier:
    """GSCN stack + affine-softmax readout on the flattened final features."""

    def __init__(self, ops: ComplexOperators, layers, readout_w, readout_b,
                 nonlinearity: str = "tanh"):
        self.ops = ops
        self.layers = list(layers)
        self.readout_w = np.asarray(readout_w, dtype=float)
        self.readout_b = np.asarray(readout_b, dtype=float)
        self.nonlinearity = nonlinearity

    @property
    def n_params(self) -> int:
        return (sum(l.n_params for l in self.layers)
                + self.readout_w.size + self.readout_b.size)

    def get_params(self) -> np.ndarray:
        parts = []
        for l in self.layers:
            parts += [l.w_down_same.ravel(), l.w_down_cross.ravel(),
                      l.w_up_same.ravel(), l.w_up_cross.ravel(), l.w_harm.ravel()]
        parts += [self.readout_w.ravel(), self.readout_b]
        return np.concatenate(parts)

    def set_params(self, flat: np.ndarray) -> None:
        pos = 0

        def take(shape):
            nonlocal pos
            size = int(np.prod(shape))
            out = flat[pos:pos + size].reshape(shape)
            pos += size
            return out

        for l in self.layers:
            l.w_down_same = take(l.w_down_same.shape)
            l.w_down_cross = take(l.w_down_cross.shape)
            l.w_up_same = take(l.w_up_same.shape)
            l.w_up_cross = take(l.w_up_cross.shape)
            l.w_harm = take(l.w_harm.shape)
        self.readout_w = take(self.readout_w.shape)
        self.readout_b = take(self.readout_b.shape)

    def _forward_cached(self, signal: np.ndarray):
        n, e, t = self.ops.dims
        z = np.asarray(signal, dtype=float).reshape(-1, 1)
        z0, z1, z2 = z[:n], z[n:n + e], z[n + e:]
        cache = []
        for layer in self.layers:
            a0, a1, a2 = _layer_preactivation(layer, self.ops, z0, z1, z2)
            cache.append((z0, z1, z2))
            if self.nonlinearity == "tanh":
                z0, z1, z2 = np.tanh(a0), np.tanh(a1), np.tanh(a2)
            else:
                z0, z1, z2 = a0, a1, a2
        features = np.concatenate([z0, z1, z2], axis=0).ravel()
        return features, (z0, z1, z2), cache

    def predict_probs(self, signal: np.ndarray) -> np.ndarray:
        features, _, _ = self._forward_cached(signal)
        logits = self.readout_w @ features + self.readout_b
        z = logits - logits.max()
        ez = np.exp(z)
        return ez / ez.sum()

    def loss_and_grad(self, signal: np.ndarray, label: int):
        from .training import ReadoutHead

        features, (z0f, z1f, z2f), cache = self._forward_cached(signal)
        head = ReadoutHead(self.readout_w, self.readout_b)
        loss, probs, grad_w, grad_b, dfeat = _loss_and_readout_grads(head, features, label)

        n, e, t = self.ops.dims
        f_out = z0f.shape[1]
        dflat = dfeat.reshape(-1, f_out)
        dz0, dz1, dz2 = dflat[:n], dflat[n:n + e], dflat[n + e:]
        outs = (z0f, z1f, z2f)

        layer_grads = []
        for layer, (z0, z1, z2) in zip(reversed(self.layers), reversed(cache)):
            if self.nonlinearity == "tanh":
                da0 = dz0 * (1 - outs[0] ** 2)
                da1 = dz1 * (1 - outs[1] ** 2)
                da2 = dz2 * (1 - outs[2] ** 2)
            else:
                da0, da1, da2 = dz0, dz1, dz2
            ops = self.ops
            j = ops.filter_order
            b1z1 = ops.b1 @ z1
            b1tz0 = ops.b1.T @ z0
            b2z2 = ops.b2 @ z2
            b2tz1 = ops.b2.T @ z1

            g_ds = np.zeros_like(layer.w_down_same)
            g_dc = np.zeros_like(layer.w_down_cross)
            g_us = np.zeros_like(layer.w_up_same)
            g_uc = np.zeros_like(layer.w_up_cross)
            g_h = (ops.q0 @ z0).T @ da0 + (ops.q1 @ z1).T @ da1 + (ops.q2 @ z2).T @ da2

            ndz0 = ops.q0 @ da0 @ layer.w_harm.T
            ndz1 = ops.q1 @ da1 @ layer.w_harm.T
            ndz2 = ops.q2 @ da2 @ layer.w_harm.T
            for p in range(1, j + 1):
                g_ds[p - 1] = (ops.l0_pows[p] @ z0).T @ da0 + (ops.l1d_pows[p] @ z1).T @ da1
                g_us[p - 1] = (ops.l1u_pows[p] @ z1).T @ da1 + (ops.l2_pows[p] @ z2).T @ da2
                ndz0 += ops.l0_pows[p] @ da0 @ layer.w_down_same[p - 1].T
                ndz1 += ops.l1d_pows[p] @ da1 @ layer.w_down_same[p - 1].T
                ndz1 += ops.l1u_pows[p] @ da1 @ layer.w_up_same[p - 1].T
                ndz2 += ops.l2_pows[p] @ da2 @ layer.w_up_same[p - 1].T
            for p in range(j + 1):
                g_dc[p] = (ops.l0_pows[p] @ b1z1).T @ da0 + (ops.l1d_pows[p] @ b1tz0).T @ da1
                g_uc[p] = (ops.l1u_pows[p] @ b2z2).T @ da1 + (ops.l2_pows[p] @ b2tz1).T @ da2
                ndz1 += ops.b1.T @ (ops.l0_pows[p] @ da0) @ layer.w_down_cross[p].T
                ndz0 += ops.b1 @ (ops.l1d_pows[p] @ da1) @ layer.w_down_cross[p].T
                ndz2 += ops.b2.T @ (ops.l1u_pows[p] @ da1) @ layer.w_up_cross[p].T
                ndz1 += ops.b2 @ (ops.l2_pows[p] @ da2) @ layer.w_up_cross[p].T
            layer_grads.append((g_ds, g_dc, g_us, g_uc, g_h))
            dz0, dz1, dz2 = ndz0, ndz1, ndz2
            outs = (z0, z1, z2)

        parts = []
        for g_ds, g_dc, g_us, g_uc, g_h in reversed(layer_grads):
            parts += [g_ds.ravel(), g_dc.ravel(), g_us.ravel(), g_uc.ravel(), g_h.ravel()]
        parts += [grad_w.ravel(), grad_b]
        return loss, np.concatenate(parts), probs


def build_gscn_classifier(complex_: SimplicialComplex2, depth: int, width: int,
                          n_classes: int, rng: np.random.Generator,
                          filter_order: int = 1,
                          nonlinearity: str = "tanh") -> GscnClassifier:
    inc = build_incidence(complex_)
    lap = build_laplacians(inc)
    ops = build_operators(complex_, lap, inc, filter_order)
    widths = [1] + [width] * depth
    layers = [init_gscn_layer(widths[i], widths[i + 1], filter_order, rng)
              for i in range(depth)]
    n_feat = complex_.n_simplices * width
    scale = 1.0 / np.sqrt(n_feat)
    return GscnClassifier(ops, layers,
                          rng.normal(0, scale, (n_classes, n_feat)),
                          np.zeros(n_classes), nonlinearity)


# ---------------------------------------------------------------------------
# MLP
# ---------------------------------------------------------------------------

class MlpClassifier:
    """tanh MLP with a linear final layer; softmax applied by the loss."""

    def __init__(self, weights, biases):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def get_params(self) -> np.ndarray:
        return np.concatenate([w.ravel() for w in self.weights]
                              + [b for b in self.biases])

    def set_params(self, flat: np.ndarray) -> None:
        pos = 0
        for i, w in enumerate(self.weights):
            self.weights[i] = flat[pos:pos + w.size].reshape(w.shape)
            pos += w.size
        for i, b in enumerate(self.biases):
            self.biases[i] = flat[pos:pos + b.size].copy()
            pos += b.size

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=float)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(w @ h + b)
        return self.weights[-1] @ h + self.biases[-1]

    def predict_probs(self, x: np.ndarray) -> np.ndarray:
        z = self.logits(x)
        z = z - z.max()
        ez = np.exp(z)
        return ez / ez.sum()

    def loss_and_grad(self, x: np.ndarray, label: int):
        h = np.asarray(x, dtype=float)
        hs = [h]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(w @ h + b)
            hs.append(h)
        logits = self.weights[-1] @ h + self.biases[-1]
        z = logits - logits.max()
        ez = np.exp(z)
        probs = ez / ez.sum()
        loss = float(-np.log(max(probs[label], 1e-12)))

        dlogits = probs.copy()
        dlogits[label] -= 1.0
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        grads_w[-1] = np.outer(dlogits, hs[-1])
        grads_b[-1] = dlogits
        dh = self.weights[-1].T @ dlogits
        for i in range(len(self.weights) - 2, -1, -1):
            dz = dh * (1 - hs[i + 1] ** 2)
            grads_w[i] = np.outer(dz, hs[i])
            grads_b[i] = dz
            dh = self.weights[i].T @ dz
        grad = np.concatenate([g.ravel() for g in grads_w] + list(grads_b))
        return loss, grad, probs


def mlp_forward(model: MlpClassifier, signal: np.ndarray) -> np.ndarray:
    """Raw logits of the MLP on one signal."""
    return model.logits(signal)


def build_mlp_classifier(in_dim: int, hidden: list[int], n_classes: int,
                         rng: np.random.Generator) -> MlpClassifier:
    widths = [in_dim] + list(hidden) + [n_classes]
    weights, biases = [], []
    for a, b in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0, 1.0 / np.sqrt(a), (b, a)))
        biases.append(np.zeros(b))
    return MlpClassifier(weights, biases)


# ---------------------------------------------------------------------------
# parameter budget matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MlpFamily:
    in_dim: int
    n_classes: int
    depth: int  # number of hidden layers

    def param_count(self, width: int) -> int:
        total = (self.in_dim + 1) * width
        total += (self.depth - 1) * (width + 1) * width
        total += (width + 1) * self.n_classes
        return total


@dataclass(frozen=True)
class GscnFamily:
    n_simplices: int
    n_classes: int
    depth: int
    filter_order: int = 1

    def param_count(self, width: int) -> int:
        per_pair = 4 * self.filter_order + 3
        total = per_pair * 1 * width  # first layer maps F=1 -> width
        total += (self.depth - 1) * per_pair * width * width
        total += self.n_simplices * width * self.n_classes + self.n_classes
        return total


def match_parameter_budget(target_params: int, family, max_width: int = 4096,
                           tolerance: float = 0.10) -> list[int]:
    """Uniform hidden widths whose parameter count best matches the target.

    Deterministic: returns the width minimizing |count - target| (ties to the
    smaller width).  Raises if even width 1 overshoots the target by more
    than the tolerance; if no width lands inside +-tolerance the closest
    attainable configuration is returned.
    """
    counts = [(family.param_count(w), w) for w in range(1, max_width + 1)]
    if counts[0][0] > target_params * (1 + tolerance):
        raise ValueError(
            f"target {target_params} below the family minimum {counts[0][0]}")
    _, best_w = min(counts, key=lambda cw: (abs(cw[0] - target_params), cw[1]))
    return [best_w] * family.depth
