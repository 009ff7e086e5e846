"""Synthetic benchmark generation, deterministic from a seed.

Task 1 (solenoidal-component detection): random order-2 complexes with 12-16
simplices carry edge signals built from a node-gradient part plus, with
probability 1/2, a triangle-curl part; the label says whether the curl part
is present.  Task 2 (source localization): a two-community stochastic block
model on 6 nodes, spiked edge signals diffused through powers of the lower
Laplacian's support, with the spiked edge community as the label.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .topology import (
    IncidenceMatrices,
    SimplicialComplex2,
    build_incidence,
    build_laplacians,
    dump_complex,
    load_complex,
)
from .training import LabeledDataset

DATASET_FORMAT_VERSION = 1


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


@dataclass(frozen=True)
class Task1Config:
    n_datasets: int = 10
    signals_per_dataset: int = 1000
    avg_nodes: float = 10.0
    edge_prob: float = 0.3
    triangle_fill_prob: float = 0.8
    min_simplices: int = 12
    max_simplices: int = 16
    bernoulli_p: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for p in (self.edge_prob, self.triangle_fill_prob, self.bernoulli_p):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.min_simplices > self.max_simplices:
            raise ValueError("min_simplices must not exceed max_simplices")


@dataclass(frozen=True)
class Task2Config:
    n_nodes: int = 6
    n_communities: int = 2
    p_intra: float = 0.85
    p_inter: float = 0.25
    n_signals: int = 1000
    noise_snr_db: float = 40.0
    t_dof: float = 10.0
    t_cap: int = 100
    seed: int = 0

    def __post_init__(self):
        for p in (self.p_intra, self.p_inter):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


def _split_indices(n: int, rng: np.random.Generator):
    """70/15/15 partition of range(n)."""
    perm = rng.permutation(n)
    n_train = int(round(0.70 * n))
    n_val = int(round(0.15 * n))
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


# ---------------------------------------------------------------------------
# Task 1
# ---------------------------------------------------------------------------

def generate_complex_task1(config: Task1Config, rng: np.random.Generator,
                           max_attempts: int = 100_000) -> SimplicialComplex2:
    """Hierarchical complex draw, rejection-sampled on total simplex count.

    Node count is Poisson(avg_nodes) conditioned on >= 3; each vertex pair
    becomes an edge with edge_prob; each triple whose three edges are present
    is filled with triangle_fill_prob; the whole complex is redrawn until
    N + E + T lies in [min_simplices, max_simplices].
    """
    for _ in range(max_attempts):
        n = int(rng.poisson(config.avg_nodes))
        while n < 3:
            n = int(rng.poisson(config.avg_nodes))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < config.edge_prob]
        edge_set = set(edges)
        triangles = []
        for u in range(n):
            for v in range(u + 1, n):
                for w in range(v + 1, n):
                    closable = ((u, v) in edge_set and (v, w) in edge_set
                                and (u, w) in edge_set)
                    if closable and rng.random() < config.triangle_fill_prob:
                        triangles.append((u, v, w))
        total = n + len(edges) + len(triangles)
        if config.min_simplices <= total <= config.max_simplices:
            return SimplicialComplex2(n, tuple(edges), tuple(triangles))
    raise GenerationError(
        f"no complex with {config.min_simplices}-{config.max_simplices} "
        f"simplices in {max_attempts} attempts")


def generate_signals_task1(complex_: SimplicialComplex2, inc: IncidenceMatrices,
                           n_signals: int, rng: np.random.Generator,
                           bernoulli_p: float = 0.5) -> LabeledDataset:
    """Edge signals B1^T s0 + A * B2 s2 with A ~ Bernoulli; node and triangle
    features are means of the incident / boundary edge values; label = A."""
    if complex_.n_triangles < 1:
        raise ValueError("task 1 needs at least one triangle for a curl component")
    n, e, t = complex_.n_vertices, complex_.n_edges, complex_.n_triangles
    node_edges = [np.nonzero(inc.b1[i])[0] for i in range(n)]
    tri_edges = [np.nonzero(inc.b2[:, j])[0] for j in range(t)]

    signals = np.zeros((n_signals, n + e + t))
    labels = np.zeros(n_signals, dtype=int)
    for s in range(n_signals):
        s0 = rng.standard_normal(n)
        s2 = rng.standard_normal(t)
        a = int(rng.random() < bernoulli_p)
        s1 = inc.b1.T @ s0 + a * (inc.b2 @ s2)
        node_feat = np.array([s1[je].mean() if len(je) else 0.0 for je in node_edges])
        tri_feat = np.array([s1[je].mean() for je in tri_edges])
        signals[s] = np.concatenate([node_feat, s1, tri_feat])
        labels[s] = a
    train, val, test = _split_indices(n_signals, rng)
    return LabeledDataset(signals, labels, train, val, test)


def generate_task1(config: Task1Config, rng: np.random.Generator,
                   max_complex_draws: int = 1000):
    """Complex plus signals; redraws the complex until it has a triangle
    (otherwise no signal can carry a curl component)."""
    for _ in range(max_complex_draws):
        complex_ = generate_complex_task1(config, rng)
        if complex_.n_triangles >= 1:
            inc = build_incidence(complex_)
            dataset = generate_signals_task1(
                complex_, inc, config.signals_per_dataset, rng, config.bernoulli_p)
            return complex_, dataset
    raise GenerationError("no complex with a triangle found")


# ---------------------------------------------------------------------------
# Task 2
# ---------------------------------------------------------------------------

def _connected(n: int, edges) -> bool:
    adj = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _sbm_complex(config: Task2Config, rng: np.random.Generator,
                 max_attempts: int = 10_000):
    """Two-community SBM draw, retried until connected with all three edge
    classes nonempty; lifted by filling every 3-clique."""
    n = config.n_nodes
    comm = np.array([i * config.n_communities // n for i in range(n)])
    for _ in range(max_attempts):
        edges, classes = [], []
        for u in range(n):
            for v in range(u + 1, n):
                same = comm[u] == comm[v]
                p = config.p_intra if same else config.p_inter
                if rng.random() < p:
                    edges.append((u, v))
                    classes.append(int(comm[u]) if same else config.n_communities)
        if not edges or not _connected(n, edges):
            continue
        n_classes = config.n_communities + 1
        if len(set(classes)) != n_classes:
            continue
        edge_set = set(edges)
        triangles = [(u, v, w)
                     for u in range(n) for v in range(u + 1, n) for w in range(v + 1, n)
                     if (u, v) in edge_set and (v, w) in edge_set and (u, w) in edge_set]
        complex_ = SimplicialComplex2(n, tuple(edges), tuple(triangles))
        # canonical sort preserves order here because edges were built sorted
        edge_class = np.array(classes, dtype=int)
        return complex_, edge_class
    raise GenerationError("no usable SBM graph found")


def generate_task2(config: Task2Config, rng: np.random.Generator):
    """Returns (complex, dataset, edge_class).

    Each signal is N(0, 1/E) edge noise plus a standard-normal spike on one
    uniformly chosen edge of a uniformly chosen class, diffused through
    S^t (S = support of the lower edge Laplacian, t a clamped heavy-tailed
    integer) and perturbed by white noise scaled to exactly 40 dB SNR.  Node
    and triangle feature slots are zero; the label is the spiked class.
    """
    complex_, edge_class = _sbm_complex(config, rng)
    inc = build_incidence(complex_)
    lap = build_laplacians(inc)
    support = (lap.l1_down != 0).astype(float)
    n, e, t = complex_.n_vertices, complex_.n_edges, complex_.n_triangles
    class_edges = [np.nonzero(edge_class == c)[0] for c in range(config.n_communities + 1)]

    signals = np.zeros((config.n_signals, n + e + t))
    labels = np.zeros(config.n_signals, dtype=int)
    for s in range(config.n_signals):
        sig = rng.standard_normal(e) / np.sqrt(e)
        label = int(rng.integers(config.n_communities + 1))
        spike_edge = class_edges[label][rng.integers(len(class_edges[label]))]
        sig[spike_edge] += rng.standard_normal()
        power = int(np.clip(round(abs(rng.standard_t(config.t_dof))), 1, config.t_cap))
        diffused = sig
        for _ in range(power):
            diffused = support @ diffused
        noise = rng.standard_normal(e)
        scale = np.linalg.norm(diffused) / (10 ** (config.noise_snr_db / 20.0)
                                            * np.linalg.norm(noise))
        signals[s, n:n + e] = diffused + scale * noise
        labels[s] = label
    train, val, test = _split_indices(config.n_signals, rng)
    return complex_, LabeledDataset(signals, labels, train, val, test), edge_class


# ---------------------------------------------------------------------------
# feature normalization (inputs of the quantum encoding must lie in [-1, 1])
# ---------------------------------------------------------------------------

@dataclass
class MinMaxNormalizer:
    """Affine per-dimension map onto [-1, 1], fitted on the training split;
    other splits are clipped so no test statistics leak into the range."""

    center: np.ndarray
    halfwidth: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray) -> "MinMaxNormalizer":
        rows = np.asarray(rows, dtype=float)
        lo, hi = rows.min(axis=0), rows.max(axis=0)
        return cls(center=(lo + hi) / 2, halfwidth=np.maximum((hi - lo) / 2, 1e-12))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return np.clip((np.asarray(x, dtype=float) - self.center) / self.halfwidth, -1.0, 1.0)


def normalize_dataset(dataset: LabeledDataset) -> LabeledDataset:
    """Dataset with every signal mapped to [-1, 1] by training-split min-max."""
    norm = MinMaxNormalizer.fit(dataset.signals[dataset.train_idx])
    return LabeledDataset(
        signals=norm.transform(dataset.signals),
        labels=dataset.labels,
        train_idx=dataset.train_idx,
        val_idx=dataset.val_idx,
        test_idx=dataset.test_idx,
    )


# ---------------------------------------------------------------------------
# on-disk layout: one directory per dataset
#   complex.txt   complex description file
#   signals.txt   one row per sample, N+E+T columns
#   labels.txt    one integer label per row
#   split.json    versioned train/val/test index lists
#   meta.json     task name and generating configuration
# ---------------------------------------------------------------------------

def save_dataset(directory, complex_: SimplicialComplex2, dataset: LabeledDataset,
                 meta: dict) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "complex.txt").write_text(dump_complex(complex_))
    np.savetxt(directory / "signals.txt", dataset.signals, fmt="%.17g")
    np.savetxt(directory / "labels.txt", dataset.labels, fmt="%d")
    split = {
        "version": DATASET_FORMAT_VERSION,
        "train": dataset.train_idx.tolist(),
        "val": dataset.val_idx.tolist(),
        "test": dataset.test_idx.tolist(),
    }
    (directory / "split.json").write_text(json.dumps(split))
    (directory / "meta.json").write_text(
        json.dumps({"version": DATASET_FORMAT_VERSION, **meta}, sort_keys=True))


def load_dataset(directory):
    directory = Path(directory)
    complex_ = load_complex(directory / "complex.txt")
    signals = np.loadtxt(directory / "signals.txt", ndmin=2)
    labels = np.loadtxt(directory / "labels.txt", dtype=int, ndmin=1)
    split = json.loads((directory / "split.json").read_text())
    if split.get("version") != DATASET_FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format version {split.get('version')}")
    meta = json.loads((directory / "meta.json").read_text())
    dataset = LabeledDataset(signals, labels,
                             np.array(split["train"]), np.array(split["val"]),
                             np.array(split["test"]))
    return complex_, dataset, meta


def task_config_to_meta(task: str, config) -> dict:
    return {"task": task, "config": asdict(config)}
