"""Gate-level circuit representation, cost model and macro expansion.

Qubits are addressed internally by a flat integer index. Registers are laid
out in declaration order and qubit 0 is the most significant bit of every
basis index.

Rotation conventions::

    Rx(t) = [[cos(t/2),    i sin(t/2)], [i sin(t/2), cos(t/2)]]
    Ry(t) = [[cos(t/2),      sin(t/2)], [-sin(t/2),  cos(t/2)]]
    Rz(t) = diag(exp(-i t/2), exp(i t/2))

Note that Rx and Ry are the adjoints of the more common ``exp(-i t X/2)``
and ``exp(-i t Y/2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

LOGICAL = "logical"
ANCILLA = "ancilla"

PRIMITIVE_KINDS = frozenset({"CNOT", "X", "Rx", "Ry", "Rz", "U2"})
MACRO_KINDS = frozenset({"Diag2", "Toffoli", "Fredkin", "Swap"})
ALL_KINDS = PRIMITIVE_KINDS | MACRO_KINDS

_ARITY = {
    "CNOT": 2, "X": 1, "Rx": 1, "Ry": 1, "Rz": 1, "U2": 1,
    "Diag2": 2, "Toffoli": 3, "Fredkin": 3, "Swap": 2,
}
_NPARAMS = {
    "CNOT": 0, "X": 0, "Rx": 1, "Ry": 1, "Rz": 1, "U2": 8,
    "Diag2": 4, "Toffoli": 0, "Fredkin": 0, "Swap": 0,
}

# CNOTs per macro after expansion. Diag2 is 2 unless its ZZ component vanishes.
TOFFOLI_CNOTS = 6
FREDKIN_CNOTS = 8
SWAP_CNOTS = 3
DIAG2_CNOTS = 2


class CircuitError(ValueError):
    """Malformed circuit or incompatible circuit operands."""


class QubitRef(NamedTuple):
    register: str
    index: int


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    role: str = LOGICAL


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _pack_matrix(u: np.ndarray) -> tuple[float, ...]:
    u = np.asarray(u, dtype=complex).reshape(4)
    out: list[float] = []
    for z in u:
        out.extend((float(z.real), float(z.imag)))
    return tuple(out)


def _unpack_matrix(params: Sequence[float]) -> np.ndarray:
    p = np.asarray(params, dtype=float)
    return (p[0::2] + 1j * p[1::2]).reshape(2, 2)


@dataclass(frozen=True)
class Gate:
    """One gate. ``qubits`` are flat indices into the owning circuit.

    U2 stores its matrix in ``params`` as interleaved (re, im) pairs in
    row-major order; Diag2 stores the phases of |00>, |01>, |10>, |11>
    with ``qubits[0]`` as the high bit.
    """

    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    tag: str = ""

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind} takes {_ARITY[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind} has repeated qubits {self.qubits}")
        if len(self.params) != _NPARAMS[self.kind]:
            raise CircuitError(f"{self.kind} takes {_NPARAMS[self.kind]} params, got {len(self.params)}")

    @property
    def matrix(self) -> np.ndarray:
        """Unitary of a single-qubit gate (or the 4x4 diagonal of Diag2)."""
        if self.kind == "Rx":
            return rx(self.params[0])
        if self.kind == "Ry":
            return ry(self.params[0])
        if self.kind == "Rz":
            return rz(self.params[0])
        if self.kind == "U2":
            return _unpack_matrix(self.params)
        if self.kind == "X":
            return PAULI_X.copy()
        if self.kind == "Diag2":
            return np.diag(np.exp(1j * np.asarray(self.params)))
        raise CircuitError(f"{self.kind} has no small matrix form")

    def adjoint(self) -> Gate:
        if self.kind in ("Rx", "Ry", "Rz"):
            return Gate(self.kind, self.qubits, (-self.params[0],), self.tag)
        if self.kind == "U2":
            return Gate("U2", self.qubits, _pack_matrix(self.matrix.conj().T), self.tag)
        if self.kind == "Diag2":
            return Gate("Diag2", self.qubits, tuple(-p for p in self.params), self.tag)
        return self

    def remap(self, mapping: Sequence[int], tag: str | None = None) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params,
                    self.tag if tag is None else tag)


def u2_gate(q: int, u: np.ndarray, tag: str = "") -> Gate:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12, rtol=0):
        raise CircuitError("U2 matrix must be a 2x2 unitary")
    return Gate("U2", (q,), _pack_matrix(u), tag)


@dataclass(frozen=True)
class Circuit:
    """Immutable circuit: registers, gate list and a global phase (radians)."""

    registers: tuple[Register, ...]
    gates: tuple[Gate, ...] = ()
    global_phase: float = 0.0
    _offsets: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise CircuitError(f"duplicate register names in {names}")
        offsets, pos = {}, 0
        for r in self.registers:
            if r.width < 0 or r.role not in (LOGICAL, ANCILLA):
                raise CircuitError(f"bad register {r}")
            offsets[r.name] = pos
            pos += r.width
        object.__setattr__(self, "_offsets", offsets)
        for g in self.gates:
            if any(q < 0 or q >= pos for q in g.qubits):
                raise CircuitError(f"gate {g.kind} references undeclared qubit {g.qubits}")

    @property
    def num_qubits(self) -> int:
        return sum(r.width for r in self.registers)

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def qubits_of(self, name: str) -> list[int]:
        off = self._offsets[name]
        return list(range(off, off + self.register(name).width))

    def qubit(self, name: str, index: int) -> int:
        if not 0 <= index < self.register(name).width:
            raise CircuitError(f"{name}[{index}] out of range")
        return self._offsets[name] + index

    def ref(self, q: int) -> QubitRef:
        for r in self.registers:
            off = self._offsets[r.name]
            if off <= q < off + r.width:
                return QubitRef(r.name, q - off)
        raise CircuitError(f"qubit {q} out of range")

    def _role_qubits(self, role: str) -> list[int]:
        out: list[int] = []
        for r in self.registers:
            if r.role == role:
                out.extend(self.qubits_of(r.name))
        return out

    @property
    def logical_qubits(self) -> list[int]:
        return self._role_qubits(LOGICAL)

    @property
    def ancilla_qubits(self) -> list[int]:
        return self._role_qubits(ANCILLA)

    def slots(self) -> dict[str, list[int]]:
        """Top-level tagged sub-circuits: label -> gate positions."""
        out: dict[str, list[int]] = {}
        for i, g in enumerate(self.gates):
            if g.tag:
                out.setdefault(g.tag.split("/")[0], []).append(i)
        return out

    def __len__(self) -> int:
        return len(self.gates)

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            entry = {"kind": g.kind, "qubits": [list(self.ref(q)) for q in g.qubits],
                     "params": list(g.params)}
            if g.tag:
                entry["tag"] = g.tag
            gates.append(entry)
        return {
            "registers": [{"name": r.name, "width": r.width, "role": r.role} for r in self.registers],
            "gates": gates,
            "global_phase": self.global_phase,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        regs = tuple(Register(r["name"], int(r["width"]), r.get("role", LOGICAL))
                     for r in data["registers"])
        shell = cls(regs)
        gates = tuple(
            Gate(g["kind"], tuple(shell.qubit(name, int(i)) for name, i in g["qubits"]),
                 tuple(float(p) for p in g.get("params", ())), g.get("tag", ""))
            for g in data["gates"]
        )
        return cls(regs, gates, float(data.get("global_phase", 0.0)))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


class CircuitBuilder:
    """Mutable helper used by the synthesis routines to assemble a Circuit."""

    def __init__(self, registers: Iterable[Register] = ()):
        self._registers: list[Register] = []
        self._offsets: dict[str, int] = {}
        self._width = 0
        self.gates: list[Gate] = []
        self.global_phase = 0.0
        for r in registers:
            self.add_register(r.name, r.width, r.role)

    @property
    def num_qubits(self) -> int:
        return self._width

    def has_register(self, name: str) -> bool:
        return name in self._offsets

    def add_register(self, name: str, width: int, role: str = LOGICAL) -> list[int]:
        if name in self._offsets:
            raise CircuitError(f"register {name!r} already declared")
        self._registers.append(Register(name, width, role))
        self._offsets[name] = self._width
        self._width += width
        return self.reg(name)

    def reg(self, name: str) -> list[int]:
        off = self._offsets[name]
        width = next(r.width for r in self._registers if r.name == name)
        return list(range(off, off + width))

    def ancilla(self, name: str, width: int) -> list[int]:
        """Declare an ancilla register, or reuse an existing one of equal width."""
        if name in self._offsets:
            reg = next(r for r in self._registers if r.name == name)
            if reg.width != width or reg.role != ANCILLA:
                raise CircuitError(f"cannot reuse register {name!r} as ancilla[{width}]")
            return self.reg(name)
        return self.add_register(name, width, ANCILLA)

    def append(self, gate: Gate) -> None:
        self.gates.append(gate)

    def add(self, kind: str, qubits: Sequence[int], params: Sequence[float] = (), tag: str = "") -> None:
        self.gates.append(Gate(kind, tuple(qubits), tuple(float(p) for p in params), tag))

    def cx(self, c: int, t: int, tag: str = "") -> None:
        self.add("CNOT", (c, t), tag=tag)

    def x(self, q: int, tag: str = "") -> None:
        self.add("X", (q,), tag=tag)

    def ccx(self, c0: int, c1: int, t: int, tag: str = "") -> None:
        self.add("Toffoli", (c0, c1, t), tag=tag)

    def cswap(self, c: int, a: int, b: int, tag: str = "") -> None:
        self.add("Fredkin", (c, a, b), tag=tag)

    def rot(self, axis: str, q: int, theta: float, tag: str = "") -> None:
        self.add("R" + axis, (q,), (theta,), tag=tag)

    def u2(self, q: int, u: np.ndarray, tag: str = "") -> None:
        self.gates.append(u2_gate(q, u, tag))

    def embed(self, sub: Circuit, bind: dict[str, Sequence[int]], prefix: str = "",
              tag: str | None = None) -> None:
        """Append ``sub`` with its registers bound to qubits of this builder.

        Registers of ``sub`` missing from ``bind`` must be ancillas; they are
        declared here as ``prefix + name`` (or reused if already present,
        which is safe because ancillas are returned to |0>).
        """
        mapping = [0] * sub.num_qubits
        for r in sub.registers:
            src = sub.qubits_of(r.name)
            if r.name in bind:
                dst = list(bind[r.name])
                if len(dst) != r.width:
                    raise CircuitError(f"register {r.name} has width {r.width}, bound to {len(dst)} qubits")
            elif r.role == ANCILLA:
                dst = self.ancilla(prefix + r.name, r.width)
            else:
                raise CircuitError(f"logical register {r.name!r} left unbound")
            for s, d in zip(src, dst):
                mapping[s] = d
        if len(set(mapping)) != len(mapping):
            raise CircuitError("embedding maps two qubits to the same target")
        for g in sub.gates:
            if tag is None:
                self.gates.append(g.remap(mapping))
            else:
                self.gates.append(g.remap(mapping, f"{tag}/{g.tag}" if g.tag else tag))
        self.global_phase += sub.global_phase

    def build(self) -> Circuit:
        return Circuit(tuple(self._registers), tuple(self.gates), self.global_phase)


# cost model -----------------------------------------------------------------


def _diag2_walsh(phases: Sequence[float]) -> tuple[float, float, float, float]:
    p00, p01, p10, p11 = phases
    return ((p00 + p01 + p10 + p11) / 4, (p00 + p01 - p10 - p11) / 4,
            (p00 - p01 + p10 - p11) / 4, (p00 - p01 - p10 + p11) / 4)


def gate_cnot_cost(g: Gate) -> int:
    if g.kind == "CNOT":
        return 1
    if g.kind == "Toffoli":
        return TOFFOLI_CNOTS
    if g.kind == "Fredkin":
        return FREDKIN_CNOTS
    if g.kind == "Swap":
        return SWAP_CNOTS
    if g.kind == "Diag2":
        return DIAG2_CNOTS if _diag2_walsh(g.params)[3] != 0 else 0
    return 0


def cnot_count(circuit: Circuit) -> int:
    """CNOT total of the macro-expanded circuit (computed without expanding)."""
    return sum(gate_cnot_cost(g) for g in circuit.gates)


# macro expansion --------------------------------------------------------------

_T_PHASE = math.pi / 8  # T = exp(i pi/8) Rz(pi/4)


def _toffoli_template(c0: int, c1: int, t: int, tag: str) -> tuple[list[Gate], float]:
    h = _pack_matrix(HADAMARD)
    q = math.pi / 4
    seq = [
        ("U2", (t,), h), ("CNOT", (c1, t), ()), ("Rz", (t,), (-q,)), ("CNOT", (c0, t), ()),
        ("Rz", (t,), (q,)), ("CNOT", (c1, t), ()), ("Rz", (t,), (-q,)), ("CNOT", (c0, t), ()),
        ("Rz", (c1,), (q,)), ("Rz", (t,), (q,)), ("U2", (t,), h), ("CNOT", (c0, c1), ()),
        ("Rz", (c0,), (q,)), ("Rz", (c1,), (-q,)), ("CNOT", (c0, c1), ()),
    ]
    # four T and three T^dagger
    return [Gate(k, qs, ps, tag) for k, qs, ps in seq], _T_PHASE


def _expand_gate(g: Gate) -> tuple[list[Gate], float]:
    if g.kind in PRIMITIVE_KINDS:
        return [g], 0.0
    if g.kind == "Toffoli":
        return _toffoli_template(*g.qubits, g.tag)
    if g.kind == "Fredkin":
        c, a, b = g.qubits
        body, phase = _toffoli_template(c, a, b, g.tag)
        return [Gate("CNOT", (b, a), (), g.tag), *body, Gate("CNOT", (b, a), (), g.tag)], phase
    if g.kind == "Swap":
        a, b = g.qubits
        return [Gate("CNOT", (a, b), (), g.tag), Gate("CNOT", (b, a), (), g.tag),
                Gate("CNOT", (a, b), (), g.tag)], 0.0
    if g.kind == "Diag2":
        q0, q1 = g.qubits
        w0, wa, wb, wab = _diag2_walsh(g.params)
        out = []
        if wa != 0:
            out.append(Gate("Rz", (q0,), (-2 * wa,), g.tag))
        if wb != 0:
            out.append(Gate("Rz", (q1,), (-2 * wb,), g.tag))
        if wab != 0:
            out += [Gate("CNOT", (q0, q1), (), g.tag), Gate("Rz", (q1,), (-2 * wab,), g.tag),
                    Gate("CNOT", (q0, q1), (), g.tag)]
        return out, w0
    raise CircuitError(f"cannot expand {g.kind}")


def expand_macros(circuit: Circuit) -> Circuit:
    """Rewrite every macro gate into CNOTs and single-qubit gates.

    The result implements exactly the same unitary; phases introduced by the
    templates go into ``global_phase``.
    """
    gates: list[Gate] = []
    phase = circuit.global_phase
    for g in circuit.gates:
        body, p = _expand_gate(g)
        gates.extend(body)
        phase += p
    return Circuit(circuit.registers, tuple(gates), phase)


def is_expanded(circuit: Circuit) -> bool:
    return all(g.kind in PRIMITIVE_KINDS for g in circuit.gates)


# algebra --------------------------------------------------------------------


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Run ``a`` then ``b`` on the same registers."""
    if a.registers != b.registers:
        raise CircuitError("compose requires identical register declarations")
    return Circuit(a.registers, a.gates + b.gates, a.global_phase + b.global_phase)


def tensor(a: Circuit, b: Circuit) -> Circuit:
    """Place ``a`` and ``b`` side by side; ``a``'s qubits come first."""
    names = {r.name for r in a.registers}
    if names & {r.name for r in b.registers}:
        raise CircuitError("tensor requires disjoint register names")
    shift = a.num_qubits
    moved = tuple(Gate(g.kind, tuple(q + shift for q in g.qubits), g.params, g.tag) for g in b.gates)
    return Circuit(a.registers + b.registers, a.gates + moved, a.global_phase + b.global_phase)


def inverse(a: Circuit) -> Circuit:
    return Circuit(a.registers, tuple(g.adjoint() for g in reversed(a.gates)), -a.global_phase)


def gate_counts(circuit: Circuit) -> dict[str, int]:
    counts: dict[str, int] = {}
    for g in circuit.gates:
        counts[g.kind] = counts.get(g.kind, 0) + 1
    return counts


# reports ----------------------------------------------------------------------


@dataclass
class SynthesisReport:
    cnot_count: int
    gate_count: int
    ancilla_count: int
    params: dict | None = None
    bound_value: float | None = None
    naive_count: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float | None:
        if not self.naive_count:
            return None
        return self.cnot_count / self.naive_count

    def to_dict(self) -> dict:
        out = {
            "cnot_count": self.cnot_count,
            "gate_count": self.gate_count,
            "ancilla_count": self.ancilla_count,
            "params": self.params,
            "bound_value": self.bound_value,
            "naive_count": self.naive_count,
            "ratio": self.ratio,
        }
        out.update(self.details)
        return out


def report_for(circuit: Circuit, params=None, bound_value: float | None = None,
               naive_count: int | None = None, **details) -> SynthesisReport:
    """Counts are taken on the macro-expanded form."""
    if params is not None and not isinstance(params, dict):
        params = {"n": params.n, "k": params.k, "t": params.t, "d": params.d}
    expanded = expand_macros(circuit)
    return SynthesisReport(cnot_count(circuit), len(expanded.gates), len(circuit.ancilla_qubits),
                           params, bound_value, naive_count, details)
