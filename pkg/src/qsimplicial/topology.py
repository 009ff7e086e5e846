"""Order-2 simplicial complexes: incidence structure, Hodge Laplacians, and
Hodge decomposition of edge signals.

Orientation convention: every edge is directed from its smaller to its larger
vertex, and a triangle (u, v, w) with u < v < w induces boundary signs
+1 on (u, v), +1 on (v, w) and -1 on (u, w).  With this choice B1 @ B2 = 0
holds exactly in integer arithmetic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_KERNEL_EIGENVALUE_CUTOFF = 1e-8


@dataclass(frozen=True)
class SimplicialComplex2:
    """An order-2 simplicial complex with canonically sorted simplices.

    Edges are (u, v) pairs with u < v, triangles (u, v, w) with u < v < w,
    both sorted lexicographically.  Construction validates the inclusivity
    property: every face of every triangle must be present as an edge.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...] = field(default=())

    def __post_init__(self):
        n = self.vertex_count
        if n < 1:
            raise ValueError(f"vertex_count must be positive, got {n}")
        edges = tuple(tuple(int(v) for v in e) for e in self.edges)
        triangles = tuple(tuple(int(v) for v in t) for t in self.triangles)
        for u, v in edges:
            if not (0 <= u < v < n):
                raise ValueError(f"edge ({u}, {v}) is not ascending or out of range")
        for u, v, w in triangles:
            if not (0 <= u < v < w < n):
                raise ValueError(f"triangle ({u}, {v}, {w}) is not ascending or out of range")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        if len(set(triangles)) != len(triangles):
            raise ValueError("duplicate triangles")
        edge_set = set(edges)
        for u, v, w in triangles:
            for face in ((u, v), (v, w), (u, w)):
                if face not in edge_set:
                    raise ValueError(
                        f"triangle ({u}, {v}, {w}) is missing edge {face} (inclusivity)"
                    )
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        object.__setattr__(self, "triangles", tuple(sorted(triangles)))

    @property
    def n_vertices(self) -> int:
        return self.vertex_count

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_simplices(self) -> int:
        """Total simplex count N + E + T (= qubit count downstream)."""
        return self.vertex_count + len(self.edges) + len(self.triangles)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def fingerprint(self) -> str:
        """Stable hash of the canonical description, used to pin checkpoints."""
        return hashlib.sha256(dump_complex(self).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IncidenceMatrices:
    """Signed incidence matrices B1 (vertices x edges) and B2 (edges x triangles)."""

    b1: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class Laplacians:
    """The Hodge Laplacians of an order-2 complex, all dense and symmetric PSD."""

    l0: np.ndarray
    l1_down: np.ndarray
    l1_up: np.ndarray
    l1: np.ndarray
    l2: np.ndarray


@dataclass(frozen=True)
class HodgeComponents:
    """Orthogonal split of an edge signal into gradient-like, curl-like and
    harmonic parts (im B1^T, im B2 and ker L1 respectively)."""

    irrotational: np.ndarray
    solenoidal: np.ndarray
    harmonic: np.ndarray


def build_incidence(complex_: SimplicialComplex2) -> IncidenceMatrices:
    """Build B1 and B2 under the low-to-high orientation convention."""
    n, edges, triangles = complex_.vertex_count, complex_.edges, complex_.triangles
    b1 = np.zeros((n, len(edges)), dtype=np.int64)
    for j, (u, v) in enumerate(edges):
        b1[u, j] = -1
        b1[v, j] = 1
    eidx = complex_.edge_index()
    b2 = np.zeros((len(edges), len(triangles)), dtype=np.int64)
    for j, (u, v, w) in enumerate(triangles):
        b2[eidx[(u, v)], j] = 1
        b2[eidx[(v, w)], j] = 1
        b2[eidx[(u, w)], j] = -1
    return IncidenceMatrices(b1=b1.astype(float), b2=b2.astype(float))


def build_laplacians(inc: IncidenceMatrices) -> Laplacians:
    """Assemble L0, the split L1 = L1_down + L1_up, and L2."""
    b1, b2 = inc.b1, inc.b2
    l0 = b1 @ b1.T
    l1_down = b1.T @ b1
    l1_up = b2 @ b2.T
    return Laplacians(l0=l0, l1_down=l1_down, l1_up=l1_up, l1=l1_down + l1_up, l2=b2.T @ b2)


def hodge_decompose(lap: Laplacians, inc: IncidenceMatrices, s1: np.ndarray) -> HodgeComponents:
    """Orthogonally decompose an edge signal.

    Projections onto im(B1^T) and im(B2) are computed by least squares on the
    incidence operators; the harmonic part is the remainder.
    """
    s1 = np.asarray(s1, dtype=float)
    if s1.shape != (inc.b1.shape[1],):
        raise ValueError(f"edge signal must have length {inc.b1.shape[1]}")
    x, *_ = np.linalg.lstsq(inc.b1.T, s1, rcond=None)
    irrotational = inc.b1.T @ x
    if inc.b2.shape[1] > 0:
        y, *_ = np.linalg.lstsq(inc.b2, s1, rcond=None)
        solenoidal = inc.b2 @ y
    else:
        solenoidal = np.zeros_like(s1)
    return HodgeComponents(
        irrotational=irrotational,
        solenoidal=solenoidal,
        harmonic=s1 - irrotational - solenoidal,
    )


def harmonic_projector(laplacian: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto ker(L) for a symmetric PSD matrix L.

    Eigenvectors with eigenvalue below 1e-8 span the kernel.
    """
    laplacian = np.asarray(laplacian, dtype=float)
    if laplacian.size == 0:
        return np.zeros_like(laplacian)
    w, v = np.linalg.eigh(laplacian)
    kernel = v[:, w < _KERNEL_EIGENVALUE_CUTOFF]
    return kernel @ kernel.T


# ---------------------------------------------------------------------------
# Complex description files
#
#   # comment
#   vertices <N>
#   e <u> <v>
#   t <u> <v> <w>
# ---------------------------------------------------------------------------

def dump_complex(complex_: SimplicialComplex2) -> str:
    lines = [f"vertices {complex_.vertex_count}"]
    lines += [f"e {u} {v}" for u, v in complex_.edges]
    lines += [f"t {u} {v} {w}" for u, v, w in complex_.triangles]
    return "\n".join(lines) + "\n"


def parse_complex(text: str) -> SimplicialComplex2:
    """Parse a complex description; validates inclusivity and sorts canonically."""
    n = None
    edges: list[tuple[int, int]] = []
    triangles: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        if kind == "vertices":
            if n is not None:
                raise ValueError(f"line {lineno}: duplicate vertices line")
            n = int(args[0])
        elif kind == "e":
            u, v = sorted(int(a) for a in args)
            edges.append((u, v))
        elif kind == "t":
            u, v, w = sorted(int(a) for a in args)
            triangles.append((u, v, w))
        else:
            raise ValueError(f"line {lineno}: unknown record {kind!r}")
    if n is None:
        raise ValueError("missing vertices line")
    return SimplicialComplex2(vertex_count=n, edges=tuple(edges), triangles=tuple(triangles))


def load_complex(path) -> SimplicialComplex2:
    with open(path) as fh:
        return parse_complex(fh.read())


def save_complex(complex_: SimplicialComplex2, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_complex(complex_))
