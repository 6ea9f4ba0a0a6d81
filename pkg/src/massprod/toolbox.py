"""Single-copy synthesis primitives.

Multiplexed rotations via the gray-code CNOT ladder, demultiplexing of
single-data-qubit multiplexors, cosine-sine / Shannon decomposition of
unitaries and disentangling-based state preparation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cossin

from .circuit import (
    HADAMARD,
    ANCILLA,
    Circuit,
    CircuitBuilder,
    Register,
    rx,
    ry,
    rz,
)

_ROT = {"x": rx, "y": ry, "z": rz}


class SynthesisError(ValueError):
    pass


def _num_bits(size: int, what: str) -> int:
    n = size.bit_length() - 1
    if size < 1 or 1 << n != size:
        raise SynthesisError(f"{what} length {size} is not a power of two")
    return n


@dataclass(frozen=True)
class PhaseFunction:
    """f(x) = exp(i angles[x]) for x in {0,1}^n, first bit most significant."""

    n: int
    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).reshape(-1)
        if len(a) != 1 << self.n:
            raise SynthesisError(f"expected {1 << self.n} angles, got {len(a)}")
        object.__setattr__(self, "angles", a)

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> PhaseFunction:
        a = np.asarray(angles, dtype=float)
        return cls(_num_bits(len(a), "phase table"), a)

    def values(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def __call__(self, x: int) -> complex:
        return complex(np.exp(1j * self.angles[x]))

    def restriction(self, k: int, i: int) -> PhaseFunction:
        """Fix the first k bits to the binary representation of i."""
        size = 1 << (self.n - k)
        return PhaseFunction(self.n - k, self.angles[i * size:(i + 1) * size])

    def to_dict(self) -> dict:
        return {"n": self.n, "angles": [float(a) for a in self.angles]}

    @classmethod
    def from_dict(cls, data: dict) -> PhaseFunction:
        return cls(int(data["n"]), np.asarray(data["angles"], dtype=float))


@dataclass(frozen=True)
class MultiplexedRotation:
    """Block-diagonal R_axis(angles[x]) on one data qubit, select value x."""

    axis: str
    angles: np.ndarray

    def __post_init__(self):
        if self.axis not in _ROT:
            raise SynthesisError(f"bad rotation axis {self.axis!r}")
        a = np.asarray(self.angles, dtype=float).reshape(-1)
        _num_bits(len(a), "rotation angle")
        object.__setattr__(self, "angles", a)

    @property
    def s(self) -> int:
        return len(self.angles).bit_length() - 1

    def blocks(self) -> np.ndarray:
        rot = _ROT[self.axis]
        return np.array([rot(t) for t in self.angles])

    def matrix(self) -> np.ndarray:
        return block_diag(self.blocks())


@dataclass(frozen=True)
class Multiplexor1:
    """(s,1)-multiplexor: one arbitrary 2x2 unitary per select value."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (2, 2):
            raise SynthesisError("blocks must have shape (2**s, 2, 2)")
        _num_bits(b.shape[0], "block")
        eye = np.eye(2)
        for u in b:
            if not np.allclose(u.conj().T @ u, eye, atol=1e-12, rtol=0):
                raise SynthesisError("multiplexor block is not unitary")
        object.__setattr__(self, "blocks", b)

    @property
    def s(self) -> int:
        return self.blocks.shape[0].bit_length() - 1

    def matrix(self) -> np.ndarray:
        return block_diag(self.blocks)


@dataclass(frozen=True)
class ZYZAngles:
    phi: float
    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.phi) * rz(self.alpha) @ ry(self.beta) @ rz(self.gamma)


@dataclass
class CSDResult:
    L1: np.ndarray
    L2: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    theta: np.ndarray

    def middle(self) -> np.ndarray:
        """Multiplexed Ry acting on the top qubit, selected by the rest."""
        c = np.cos(self.theta / 2)
        s = np.sin(self.theta / 2)
        return np.block([[np.diag(c), np.diag(s)], [np.diag(-s), np.diag(c)]])

    def reassemble(self) -> np.ndarray:
        left = block_diag([self.L1, self.L2])
        right = block_diag([self.R1, self.R2])
        return left @ self.middle() @ right


def block_diag(blocks) -> np.ndarray:
    blocks = [np.asarray(b) for b in blocks]
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for b in blocks:
        d = b.shape[0]
        out[pos:pos + d, pos:pos + d] = b
        pos += d
    return out


def is_unitary(u: np.ndarray, tol: float) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


# phase functions --------------------------------------------------------------


def lift_bar(f: PhaseFunction) -> PhaseFunction:
    """f_bar(x, c) = f(x)^(1-2c), with c as the new lowest-order bit."""
    out = np.empty(2 * len(f.angles))
    out[0::2] = f.angles
    out[1::2] = -f.angles
    return PhaseFunction(f.n + 1, out)


# multiplexed rotations ----------------------------------------------------------


def gray(j: int) -> int:
    return j ^ (j >> 1)


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized transform w[y] = sum_x (-1)^popcount(x & y) values[x]."""
    w = np.array(values, dtype=float)
    h = 1
    while h < len(w):
        w = w.reshape(-1, 2, h)
        w = np.stack([w[:, 0] + w[:, 1], w[:, 0] - w[:, 1]], axis=1).reshape(-1)
        h *= 2
    return w


def gray_code_angles(angles: np.ndarray) -> np.ndarray:
    """Angles for the gray-code ladder so select x sees sum_j (-1)^<x, gray(j)> out[j]."""
    s = len(angles).bit_length() - 1
    w = walsh_hadamard(angles) / (1 << s)
    return w[[gray(j) for j in range(1 << s)]]


def multiplexed_rotation_gates(builder: CircuitBuilder, m: MultiplexedRotation,
                               selects: Sequence[int], data: int, tag: str = "") -> None:
    """Append the gray-code ladder for ``m`` onto existing builder qubits.

    ``selects[0]`` is the most significant select bit. Uses exactly 2**s CNOTs.
    """
    s = m.s
    if len(selects) != s:
        raise SynthesisError(f"rotation has {s} selects, got {len(selects)} qubits")
    if s == 0:
        builder.rot(m.axis, data, float(m.angles[0]), tag)
        return
    # Rx does not anticommute with X, so build it from Rz: Rx(t) = H Rz(-t) H.
    axis, sign = (m.axis, 1.0) if m.axis != "x" else ("z", -1.0)
    if m.axis == "x":
        builder.u2(data, HADAMARD, tag)
    hat = gray_code_angles(sign * m.angles)
    size = 1 << s
    for j in range(size):
        builder.rot(axis, data, float(hat[j]), tag)
        bit = (gray(j) ^ gray((j + 1) % size)).bit_length() - 1
        builder.cx(selects[s - 1 - bit], data, tag)
    if m.axis == "x":
        builder.u2(data, HADAMARD, tag)


def synth_multiplexed_rotation(m: MultiplexedRotation) -> Circuit:
    """Circuit on registers ``sel`` (s qubits) and ``data`` (1 qubit)."""
    b = CircuitBuilder()
    sel = b.add_register("sel", m.s) if m.s else []
    data = b.add_register("data", 1)[0]
    multiplexed_rotation_gates(b, m, sel, data)
    return b.build()


# diagonals -------------------------------------------------------------------------


def diagonal_to_multiplexed_rz(f: PhaseFunction) -> tuple[MultiplexedRotation, PhaseFunction]:
    """Split diag(f) into an Rz multiplexed on the last qubit times a diagonal on the rest.

    For n = 1 the residual is a 0-bit phase function holding the global phase.
    """
    if f.n < 1:
        raise SynthesisError("need at least one qubit")
    even, odd = f.angles[0::2], f.angles[1::2]
    return MultiplexedRotation("z", odd - even), PhaseFunction(f.n - 1, (even + odd) / 2)


def diagonal_layers(f: PhaseFunction) -> tuple[list[MultiplexedRotation], float]:
    """All Rz layers (s = n-1 down to 0) plus the leftover global phase."""
    layers = []
    while f.n > 0:
        rot, f = diagonal_to_multiplexed_rz(f)
        layers.append(rot)
    return layers, float(f.angles[0])


def diagonal_gates(builder: CircuitBuilder, f: PhaseFunction, qubits: Sequence[int],
                   tag: str = "") -> None:
    """Append diag(f) on ``qubits`` (first = most significant). 2**n - 2 CNOTs."""
    layers, phase = diagonal_layers(f)
    for rot in layers:
        s = rot.s
        multiplexed_rotation_gates(builder, rot, qubits[:s], qubits[s], tag)
    builder.global_phase += phase


def synth_diagonal(f: PhaseFunction) -> Circuit:
    b = CircuitBuilder()
    q = b.add_register("x", f.n)
    diagonal_gates(b, f, q)
    return b.build()


# single-qubit and multiplexor decompositions --------------------------------------

_DEGENERATE = 1e-14


def zyz_decompose(u: np.ndarray) -> ZYZAngles:
    """u = exp(i phi) Rz(alpha) Ry(beta) Rz(gamma) with beta in [0, pi]."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, 1e-12):
        raise SynthesisError("zyz_decompose needs a 2x2 unitary")
    phi = float(np.angle(np.linalg.det(u))) / 2
    v = u * np.exp(-1j * phi)
    beta = 2 * math.atan2(abs(v[0, 1]), abs(v[0, 0]))
    if abs(v[0, 1]) < _DEGENERATE:
        return ZYZAngles(phi, 2 * float(np.angle(v[1, 1])), beta, 0.0)
    if abs(v[1, 1]) < _DEGENERATE:
        return ZYZAngles(phi, -2 * float(np.angle(v[0, 1])), beta, 0.0)
    a11, a01 = float(np.angle(v[1, 1])), float(np.angle(v[0, 1]))
    return ZYZAngles(phi, a11 - a01, beta, a11 + a01)


def demultiplex_1data(m: Multiplexor1) -> tuple[PhaseFunction, MultiplexedRotation,
                                                 MultiplexedRotation, MultiplexedRotation]:
    """Return (delta, rz1, ry, rz2) with blocks[x] = e^{i delta_x} Rz(rz1_x) Ry(ry_x) Rz(rz2_x).

    In time order a circuit applies rz2, then ry, then rz1, then diag(delta)
    on the select qubits.
    """
    parts = [zyz_decompose(u) for u in m.blocks]
    delta = PhaseFunction(m.s, np.array([p.phi for p in parts]))
    return (delta,
            MultiplexedRotation("z", np.array([p.alpha for p in parts])),
            MultiplexedRotation("y", np.array([p.beta for p in parts])),
            MultiplexedRotation("z", np.array([p.gamma for p in parts])))


def multiplexor1_gates(builder: CircuitBuilder, m: Multiplexor1, selects: Sequence[int],
                       data: int, tag: str = "") -> None:
    if m.s == 0:
        builder.u2(data, m.blocks[0], tag)
        return
    delta, rz1, ryr, rz2 = demultiplex_1data(m)
    for rot in (rz2, ryr, rz1):
        multiplexed_rotation_gates(builder, rot, selects, data, tag)
    diagonal_gates(builder, delta, selects, tag)


def synth_multiplexor1(m: Multiplexor1) -> Circuit:
    b = CircuitBuilder()
    sel = b.add_register("sel", m.s) if m.s else []
    data = b.add_register("data", 1)[0]
    multiplexor1_gates(b, m, sel, data)
    return b.build()


# cosine-sine and Shannon decomposition -------------------------------------------


def cosine_sine_decompose(u: np.ndarray) -> CSDResult:
    """Split u = (L1 + L2) . multiplexed-Ry(theta) . (R1 + R2) (direct sums).

    The middle factor acts on the top qubit with the remaining qubits as
    selects; its 2x2 blocks are Ry(theta_j) in this package's convention.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] % 2:
        raise SynthesisError("cosine_sine_decompose needs an even square matrix")
    if not is_unitary(u, 1e-10):
        raise SynthesisError("input is not unitary")
    h = u.shape[0] // 2
    (l1, l2), angles, (r1, r2) = cossin(u, p=h, q=h, separate=True)
    # LAPACK middle is [[C, -S], [S, C]]; Ry(t) has +sin(t/2) top-right, so t = -2*angle.
    return CSDResult(l1, l2, r1, r2, -2 * np.asarray(angles))


@dataclass
class QSDFactor:
    """One factor of a Shannon decomposition, in time order.

    ``kind`` is "mux" (a Multiplexor1) or "ry" (a multiplexed Ry). ``selects``
    and ``data`` are qubit positions of the n-qubit input unitary.
    """

    kind: str
    op: object
    selects: tuple[int, ...]
    data: int


def qsd_factors(u: np.ndarray) -> list[QSDFactor]:
    """Recursive cosine-sine splitting down to (n-1,1)-multiplexors."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise SynthesisError("need a square matrix")
    n = _num_bits(u.shape[0], "unitary dimension")
    if n < 1:
        raise SynthesisError("need at least one qubit")
    if not is_unitary(u, 1e-10):
        raise SynthesisError("input is not unitary")

    factors: list[QSDFactor] = []

    def rec(blocks: np.ndarray, s: int) -> None:
        # blocks: 2**s unitaries on the last n - s qubits, selected by the first s.
        d = n - s
        if d == 1:
            factors.append(QSDFactor("mux", Multiplexor1(blocks), tuple(range(n - 1)), n - 1))
            return
        parts = [cosine_sine_decompose(b) for b in blocks]
        rights = np.array([blk for p in parts for blk in (p.R1, p.R2)])
        lefts = np.array([blk for p in parts for blk in (p.L1, p.L2)])
        rec(rights, s + 1)
        thetas = np.concatenate([p.theta for p in parts])
        selects = tuple(q for q in range(n) if q != s)
        factors.append(QSDFactor("ry", MultiplexedRotation("y", thetas), selects, s))
        rec(lefts, s + 1)

    rec(u[None, :, :], 0)
    return factors


def qsd_synthesize(u: np.ndarray) -> Circuit:
    """Single-copy circuit for an n-qubit unitary on register ``q``."""
    factors = qsd_factors(u)
    n = _num_bits(np.asarray(u).shape[0], "unitary dimension")
    b = CircuitBuilder()
    q = b.add_register("q", n)
    for fac in factors:
        sel = [q[i] for i in fac.selects]
        if fac.kind == "mux":
            multiplexor1_gates(b, fac.op, sel, q[fac.data])
        else:
            multiplexed_rotation_gates(b, fac.op, sel, q[fac.data])
    return b.build()


# state preparation ---------------------------------------------------------------


@dataclass
class StatePrepSchedule:
    """Disentangling angles; level l has Rz/Ry arrays of length 2**l targeting qubit l."""

    n: int
    rz: list[np.ndarray]
    ry: list[np.ndarray]
    global_phase: float


def state_prep_angles(psi: Sequence[complex]) -> StatePrepSchedule:
    """Angles such that, for l = n-1 down to 0, Rz-mux then Ry-mux on qubit l
    (selected by qubits 0..l-1) maps psi to exp(i global_phase)|0...0>."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = _num_bits(len(psi), "state")
    norm = float(np.linalg.norm(psi))
    if norm == 0:
        raise SynthesisError("zero-norm state")
    if abs(norm - 1) > 1e-10:
        raise SynthesisError(f"state norm {norm} is not 1")
    rz_levels: list[np.ndarray] = [np.zeros(0)] * n
    ry_levels: list[np.ndarray] = [np.zeros(0)] * n
    cur = psi
    for level in range(n - 1, -1, -1):
        a0, a1 = cur[0::2], cur[1::2]
        m0, m1 = np.abs(a0), np.abs(a1)
        p0, p1 = np.angle(a0), np.angle(a1)
        r = np.hypot(m0, m1)
        live = r > 0
        rz_levels[level] = np.where(live, p0 - p1, 0.0)
        ry_levels[level] = np.where(live, 2 * np.arctan2(m1, m0), 0.0)
        cur = r * np.exp(0.5j * (p0 + p1))
    return StatePrepSchedule(n, rz_levels, ry_levels, float(np.angle(cur[0])))


def state_prep_gates(builder: CircuitBuilder, sched: StatePrepSchedule, qubits: Sequence[int],
                     levels: Sequence[int] | None = None) -> None:
    """Append the preparation circuit (inverse of the disentangler) level by level."""
    for level in range(sched.n) if levels is None else levels:
        sel, data = qubits[:level], qubits[level]
        multiplexed_rotation_gates(builder, MultiplexedRotation("y", -sched.ry[level]), sel, data)
        multiplexed_rotation_gates(builder, MultiplexedRotation("z", -sched.rz[level]), sel, data)


def synth_state_prep_single(psi: Sequence[complex]) -> Circuit:
    sched = state_prep_angles(psi)
    b = CircuitBuilder()
    q = b.add_register("q", sched.n)
    state_prep_gates(b, sched, q)
    b.global_phase += sched.global_phase
    return b.build()
