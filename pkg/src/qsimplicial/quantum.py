"""Dense statevector simulation of n-qubit circuits.

States are bare complex128 arrays of 2**n amplitudes, with qubit 0 the most
significant index bit.  Gates update amplitudes in place with stride-based
pair iteration over a float64 view of the state (compiled with numba, with
contiguous inner loops so the hot paths vectorize); this is the only approach
that scales to the 16-20 qubit circuits used in experiments.  A dense-unitary
construction of every gate exists in the test suite as an independent oracle
for small n.

Rotation convention: R_a(theta) = exp(-i * theta * sigma_a / 2), so e.g.
R_x(pi)|0> = -i|1>.  Global phase is never normalized away; probabilities
and expectations are phase-insensitive by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from numba import njit

MAX_QUBITS = 24

# program opcodes
OP_ROT = 0
OP_CX = 1
OP_ZZ = 2  # diagonal two-qubit phase exp(-i theta Z Z / 2); realizes LI_zz


class Axis(IntEnum):
    X = 0
    Y = 1
    Z = 2


@dataclass(frozen=True)
class GateDescriptor:
    """One gate of a circuit listing.

    kind is one of "rotation", "cx", "li".  ``angle`` is a literal value in
    radians unless ``param`` names a slot in an external parameter vector.
    """

    kind: str
    qubits: tuple[int, ...]
    axes: tuple[Axis, ...] = field(default=())
    angle: float = 0.0
    param: int | None = None


def _f8(state: np.ndarray) -> np.ndarray:
    """Float64 view (interleaved re/im) of a contiguous complex128 state."""
    return state.view(np.float64)


# ---------------------------------------------------------------------------
# compiled kernels.  All operate on the float64 view; index i of the complex
# state lives at view positions 2i (re) and 2i+1 (im).  Pair loops are blocked
# so the innermost loop walks contiguous memory.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _k_apply2(v, n, q, m00r, m00i, m01r, m01i, m10r, m10i, m11r, m11i):
    """Generic single-qubit 2x2 update on qubit q."""
    m = n - 1 - q
    tk = 1 << m
    dim = v.shape[0] >> 1
    nblk = dim >> (m + 1)
    o2 = tk << 1
    for blk in range(nblk):
        base = (blk << (m + 1)) << 1
        for off in range(tk):
            i1 = base + (off << 1)
            i2 = i1 + o2
            ar = v[i1]
            ai = v[i1 + 1]
            br = v[i2]
            bi = v[i2 + 1]
            v[i1] = m00r * ar - m00i * ai + m01r * br - m01i * bi
            v[i1 + 1] = m00r * ai + m00i * ar + m01r * bi + m01i * br
            v[i2] = m10r * ar - m10i * ai + m11r * br - m11i * bi
            v[i2 + 1] = m10r * ai + m10i * ar + m11r * bi + m11i * br


@njit(cache=True)
def _k_diag1(v, n, q, e0r, e0i, e1r, e1i):
    """Diagonal single-qubit phase diag(e0, e1) on qubit q."""
    m = n - 1 - q
    tk = 1 << m
    dim = v.shape[0] >> 1
    nblk = dim >> (m + 1)
    o2 = tk << 1
    for blk in range(nblk):
        base = (blk << (m + 1)) << 1
        for off in range(tk):
            i1 = base + (off << 1)
            i2 = i1 + o2
            ar = v[i1]
            ai = v[i1 + 1]
            v[i1] = e0r * ar - e0i * ai
            v[i1 + 1] = e0r * ai + e0i * ar
            br = v[i2]
            bi = v[i2 + 1]
            v[i2] = e1r * br - e1i * bi
            v[i2 + 1] = e1r * bi + e1i * br


@njit(cache=True)
def _k_rot(v, n, q, axis, theta):
    """R_axis(theta) on qubit q."""
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    if axis == 0:    # X: [[c, -is], [-is, c]]
        _k_apply2(v, n, q, c, 0.0, 0.0, -s, 0.0, -s, c, 0.0)
    elif axis == 1:  # Y: [[c, -s], [s, c]]
        _k_apply2(v, n, q, c, 0.0, -s, 0.0, s, 0.0, c, 0.0)
    else:            # Z: diag(e^{-i t/2}, e^{+i t/2})
        _k_diag1(v, n, q, c, -s, c, s)


@njit(cache=True)
def _k_cx(v, n, control, target):
    """Swap target-bit pairs wherever the control bit is set."""
    pc = n - 1 - control
    pt = n - 1 - target
    p_lo = pc if pc < pt else pt
    p_hi = pc if pc > pt else pt
    dim = v.shape[0] >> 1
    cbit_at_hi = pc > pt
    n_hi = dim >> (p_hi + 1)
    n_mid = 1 << (p_hi - p_lo - 1)
    run = 1 << p_lo
    tm2 = (1 << pt) << 1
    for a in range(n_hi):
        for b in range(n_mid):
            if cbit_at_hi:
                base = (a << (p_hi + 1)) | (1 << p_hi) | (b << (p_lo + 1))
            else:
                base = (a << (p_hi + 1)) | (b << (p_lo + 1)) | (1 << p_lo)
            base <<= 1
            for off in range(run):
                i = base + (off << 1)
                j = i + tm2
                tr = v[i]
                ti = v[i + 1]
                v[i] = v[j]
                v[i + 1] = v[j + 1]
                v[j] = tr
                v[j + 1] = ti
    return


@njit(cache=True)
def _k_zz(v, n, qi, qj, theta):
    """exp(-i theta/2) phase on even (qi, qj) parity, exp(+i theta/2) on odd."""
    mi = 1 << (n - 1 - qi)
    mj = 1 << (n - 1 - qj)
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    dim = v.shape[0] >> 1
    for i in range(dim):
        even = ((i & mi) == 0) == ((i & mj) == 0)
        k = i << 1
        ar = v[k]
        ai = v[k + 1]
        if even:
            v[k] = c * ar + s * ai
            v[k + 1] = c * ai - s * ar
        else:
            v[k] = c * ar - s * ai
            v[k + 1] = c * ai + s * ar


@njit(cache=True)
def _run_program(v, n, ops, q0, q1, axes, angles):
    for g in range(ops.shape[0]):
        op = ops[g]
        if op == OP_ROT:
            _k_rot(v, n, q0[g], axes[g], angles[g])
        elif op == OP_CX:
            _k_cx(v, n, q0[g], q1[g])
        else:
            _k_zz(v, n, q0[g], q1[g], angles[g])


# --- fused reverse-sweep kernels (adjoint gradients) ------------------------

@njit(cache=True)
def _bk_pair_apply2(va, vl, n, q, m00r, m00i, m01r, m01i, m10r, m10i, m11r, m11i):
    """Apply the same 2x2 to two states in one pass."""
    m = n - 1 - q
    tk = 1 << m
    dim = va.shape[0] >> 1
    nblk = dim >> (m + 1)
    o2 = tk << 1
    for blk in range(nblk):
        base = (blk << (m + 1)) << 1
        for off in range(tk):
            i1 = base + (off << 1)
            i2 = i1 + o2
            ar = va[i1]
            ai = va[i1 + 1]
            br = va[i2]
            bi = va[i2 + 1]
            va[i1] = m00r * ar - m00i * ai + m01r * br - m01i * bi
            va[i1 + 1] = m00r * ai + m00i * ar + m01r * bi + m01i * br
            va[i2] = m10r * ar - m10i * ai + m11r * br - m11i * bi
            va[i2 + 1] = m10r * ai + m10i * ar + m11r * bi + m11i * br
            ar = vl[i1]
            ai = vl[i1 + 1]
            br = vl[i2]
            bi = vl[i2 + 1]
            vl[i1] = m00r * ar - m00i * ai + m01r * br - m01i * bi
            vl[i1 + 1] = m00r * ai + m00i * ar + m01r * bi + m01i * br
            vl[i2] = m10r * ar - m10i * ai + m11r * br - m11i * bi
            vl[i2 + 1] = m10r * ai + m10i * ar + m11r * bi + m11i * br


@njit(cache=True)
def _bk_rot_extract_undo(va, vl, n, q, axis, theta):
    """Im(<lam| sigma_axis^{(q)} |amp>), then R_axis(-theta) on both states.

    One memory pass; the returned value is the parameter-shift derivative of
    the observable seeded into lam with respect to this gate occurrence.
    """
    m = n - 1 - q
    tk = 1 << m
    dim = va.shape[0] >> 1
    nblk = dim >> (m + 1)
    o2 = tk << 1
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)  # undo uses -theta: sin flips
    acc = 0.0
    if axis == 0:    # sigma_x; undo R_x(-t): [[c, is], [is, c]]
        for blk in range(nblk):
            base = (blk << (m + 1)) << 1
            for off in range(tk):
                i1 = base + (off << 1)
                i2 = i1 + o2
                ar = va[i1]
                ai = va[i1 + 1]
                br = va[i2]
                bi = va[i2 + 1]
                l1r = vl[i1]
                l1i = vl[i1 + 1]
                l2r = vl[i2]
                l2i = vl[i2 + 1]
                acc += l1r * bi - l1i * br + l2r * ai - l2i * ar
                va[i1] = c * ar - s * bi
                va[i1 + 1] = c * ai + s * br
                va[i2] = -s * ai + c * br
                va[i2 + 1] = s * ar + c * bi
                vl[i1] = c * l1r - s * l2i
                vl[i1 + 1] = c * l1i + s * l2r
                vl[i2] = -s * l1i + c * l2r
                vl[i2 + 1] = s * l1r + c * l2i
    elif axis == 1:  # sigma_y; undo R_y(-t): [[c, s], [-s, c]]
        for blk in range(nblk):
            base = (blk << (m + 1)) << 1
            for off in range(tk):
                i1 = base + (off << 1)
                i2 = i1 + o2
                ar = va[i1]
                ai = va[i1 + 1]
                br = va[i2]
                bi = va[i2 + 1]
                l1r = vl[i1]
                l1i = vl[i1 + 1]
                l2r = vl[i2]
                l2i = vl[i2 + 1]
                acc += -l1r * br - l1i * bi + l2r * ar + l2i * ai
                va[i1] = c * ar + s * br
                va[i1 + 1] = c * ai + s * bi
                va[i2] = -s * ar + c * br
                va[i2 + 1] = -s * ai + c * bi
                vl[i1] = c * l1r + s * l2r
                vl[i1 + 1] = c * l1i + s * l2i
                vl[i2] = -s * l1r + c * l2r
                vl[i2 + 1] = -s * l1i + c * l2i
    else:            # sigma_z; undo R_z(-t): diag(e^{+it/2}, e^{-it/2})
        for blk in range(nblk):
            base = (blk << (m + 1)) << 1
            for off in range(tk):
                i1 = base + (off << 1)
                i2 = i1 + o2
                ar = va[i1]
                ai = va[i1 + 1]
                br = va[i2]
                bi = va[i2 + 1]
                l1r = vl[i1]
                l1i = vl[i1 + 1]
                l2r = vl[i2]
                l2i = vl[i2 + 1]
                acc += l1r * ai - l1i * ar - (l2r * bi - l2i * br)
                va[i1] = c * ar - s * ai
                va[i1 + 1] = c * ai + s * ar
                va[i2] = c * br + s * bi
                va[i2 + 1] = c * bi - s * br
                vl[i1] = c * l1r - s * l1i
                vl[i1 + 1] = c * l1i + s * l1r
                vl[i2] = c * l2r + s * l2i
                vl[i2 + 1] = c * l2i - s * l2r
    return acc


@njit(cache=True)
def _bk_cx_pair(va, vl, n, control, target):
    _k_cx(va, n, control, target)
    _k_cx(vl, n, control, target)


@njit(cache=True)
def _bk_zz_extract_undo(va, vl, n, qi, qj, theta, extract):
    """Optionally Im(<lam| Z_qi Z_qj |amp>), then the inverse parity phase on
    both states, in one pass."""
    mi = 1 << (n - 1 - qi)
    mj = 1 << (n - 1 - qj)
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    dim = va.shape[0] >> 1
    acc = 0.0
    for i in range(dim):
        even = ((i & mi) == 0) == ((i & mj) == 0)
        k = i << 1
        ar = va[k]
        ai = va[k + 1]
        lr = vl[k]
        li = vl[k + 1]
        if extract:
            if even:
                acc += lr * ai - li * ar
            else:
                acc -= lr * ai - li * ar
        if even:  # multiply by e^{+i theta/2}
            va[k] = c * ar - s * ai
            va[k + 1] = c * ai + s * ar
            vl[k] = c * lr - s * li
            vl[k + 1] = c * li + s * lr
        else:
            va[k] = c * ar + s * ai
            va[k + 1] = c * ai - s * ar
            vl[k] = c * lr + s * li
            vl[k + 1] = c * li - s * lr
    return acc


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def init_zero(n: int) -> np.ndarray:
    """The |0...0> state on n qubits."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    amp = np.zeros(1 << n, dtype=np.complex128)
    amp[0] = 1.0
    return amp


def n_qubits(state: np.ndarray) -> int:
    return int(len(state)).bit_length() - 1


def _check_qubit(state, q):
    n = n_qubits(state)
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    return n


def apply_rotation(state: np.ndarray, qubit: int, axis: Axis, angle: float) -> np.ndarray:
    """Apply R_axis(angle) on one qubit, in place."""
    n = _check_qubit(state, qubit)
    _k_rot(_f8(state), n, qubit, int(axis), float(angle))
    return state


def apply_cx(state: np.ndarray, control: int, target: int) -> np.ndarray:
    """Apply a controlled-X gate, in place."""
    n = _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    _k_cx(_f8(state), n, control, target)
    return state


def apply_li(state: np.ndarray, i: int, j: int, k: Axis, p: Axis, angle: float) -> np.ndarray:
    """Two-qubit learnable-interaction block: CX(i,j), rotation(s) on j, CX(i,j).

    For k == p the middle block is the single rotation R_k(angle); otherwise
    R_k(angle) followed by R_p(angle), both by the same angle.  The (z, z)
    case is applied as the equivalent fused diagonal parity phase (the CX
    conjugation of a Z rotation multiplies each amplitude by exactly the same
    factor).
    """
    n = _check_qubit(state, i)
    _check_qubit(state, j)
    if i == j:
        raise ValueError("interaction qubits must differ")
    k, p = Axis(k), Axis(p)
    v = _f8(state)
    if k == Axis.Z and p == Axis.Z:
        _k_zz(v, n, i, j, float(angle))
        return state
    _k_cx(v, n, i, j)
    _k_rot(v, n, j, int(k), float(angle))
    if p != k:
        _k_rot(v, n, j, int(p), float(angle))
    _k_cx(v, n, i, j)
    return state


def apply_gate(state: np.ndarray, gate: GateDescriptor, params: np.ndarray | None = None) -> np.ndarray:
    """Apply one GateDescriptor; parameter references resolve against ``params``."""
    angle = gate.angle
    if gate.param is not None:
        if params is None:
            raise ValueError("gate references a parameter but no parameter vector given")
        angle = float(params[gate.param])
    if gate.kind == "rotation":
        return apply_rotation(state, gate.qubits[0], gate.axes[0], angle)
    if gate.kind == "cx":
        return apply_cx(state, gate.qubits[0], gate.qubits[1])
    if gate.kind == "li":
        return apply_li(state, gate.qubits[0], gate.qubits[1], gate.axes[0], gate.axes[1], angle)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def pauli_z_expectation(state: np.ndarray, qubit: int) -> float:
    """<Z> on one qubit; always in [-1, 1]."""
    _check_qubit(state, qubit)
    p = basis_probabilities(state).reshape(1 << qubit, 2, -1)
    return float(p[:, 0, :].sum() - p[:, 1, :].sum())


def all_z_expectations(state: np.ndarray) -> np.ndarray:
    """<Z> on every qubit."""
    n = n_qubits(state)
    p = basis_probabilities(state)
    out = np.empty(n)
    for q in range(n):
        pq = p.reshape(1 << q, 2, -1)
        out[q] = pq[:, 0, :].sum() - pq[:, 1, :].sum()
    return out


def basis_probabilities(state: np.ndarray) -> np.ndarray:
    """Computational-basis outcome probabilities |amplitude|^2."""
    return state.real ** 2 + state.imag ** 2


def sample_shots(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial histogram of ``shots`` draws from a probability vector."""
    probs = np.asarray(probs, dtype=float)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return rng.multinomial(shots, probs / total)


def shannon_entropy(probs: np.ndarray) -> float:
    """-sum p log2 p in bits, with 0 log 0 = 0."""
    probs = np.asarray(probs, dtype=float)
    p = probs[probs > 0.0]
    return float(-(p * np.log2(p)).sum())


# ---------------------------------------------------------------------------
# plain-text circuit listings (debugging / golden files)
# ---------------------------------------------------------------------------

_AXIS_NAMES = {Axis.X: "x", Axis.Y: "y", Axis.Z: "z"}
_AXIS_FROM_NAME = {v: k for k, v in _AXIS_NAMES.items()}


def gates_to_text(gates) -> str:
    """One gate per line: `RX q theta`, `CX c t`, `LI i j k p theta`."""
    lines = []
    for g in gates:
        if g.kind == "rotation":
            name = "R" + _AXIS_NAMES[g.axes[0]].upper()
            lines.append(f"{name} {g.qubits[0]} {g.angle!r}")
        elif g.kind == "cx":
            lines.append(f"CX {g.qubits[0]} {g.qubits[1]}")
        elif g.kind == "li":
            k, p = (_AXIS_NAMES[a] for a in g.axes)
            lines.append(f"LI {g.qubits[0]} {g.qubits[1]} {k} {p} {g.angle!r}")
        else:
            raise ValueError(f"unknown gate kind {g.kind!r}")
    return "\n".join(lines) + "\n"


def gates_from_text(text: str) -> list[GateDescriptor]:
    gates = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        name = parts[0].upper()
        if name in ("RX", "RY", "RZ"):
            axis = _AXIS_FROM_NAME[name[1].lower()]
            gates.append(GateDescriptor("rotation", (int(parts[1]),), (axis,), float(parts[2])))
        elif name == "CX":
            gates.append(GateDescriptor("cx", (int(parts[1]), int(parts[2]))))
        elif name == "LI":
            i, j = int(parts[1]), int(parts[2])
            k, p = _AXIS_FROM_NAME[parts[3]], _AXIS_FROM_NAME[parts[4]]
            gates.append(GateDescriptor("li", (i, j), (k, p), float(parts[5])))
        else:
            raise ValueError(f"unknown gate {name!r}")
    return gates
