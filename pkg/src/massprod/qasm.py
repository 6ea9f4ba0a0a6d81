"""OpenQASM 2.0 export of macro-expanded circuits, plus a parser for the same subset.

Registers become ``qreg`` declarations in circuit order, so ``name[i]`` in the
text is qubit ``i`` of that register. Since qelib1 defines ``rx``/``ry`` as
``exp(-i t X/2)``/``exp(-i t Y/2)``, our Rx(t) and Ry(t) are written as
``rx(-t)`` and ``ry(-t)``; ``rz`` matches directly. U2 gates are written as
``u3`` and the phase difference is accumulated into a ``// global_phase``
header comment, which the parser reads back.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .circuit import (
    ANCILLA,
    LOGICAL,
    Circuit,
    CircuitError,
    Gate,
    Register,
    is_expanded,
    u2_gate,
)

_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -np.exp(1j * lam) * s],
                     [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]], dtype=complex)


def u3_params(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return (theta, phi, lam, alpha) with u = exp(i alpha) u3(theta, phi, lam)."""
    theta = 2 * math.atan2(abs(u[1, 0]), abs(u[0, 0]))
    a00, a10 = float(np.angle(u[0, 0])), float(np.angle(u[1, 0]))
    a01, a11 = float(np.angle(-u[0, 1])), float(np.angle(u[1, 1]))
    # read phases from the larger pair of entries; the others may be noise
    if abs(u[0, 0]) >= abs(u[1, 0]):
        alpha = a00
        lam = a01 - alpha if abs(u[0, 1]) > 1e-14 else 0.0
        phi = a11 - alpha - lam
    else:
        alpha = a10 + a01 - a11 if abs(u[0, 0]) > 1e-14 else a10
        phi = a10 - alpha
        lam = a01 - alpha
    return theta, phi, lam, alpha


def _fmt(x: float) -> str:
    return repr(float(x))


def export_qasm(circuit: Circuit) -> str:
    """Emit OpenQASM 2.0 using only cx, rx, ry, rz and u3."""
    if not is_expanded(circuit):
        bad = sorted({g.kind for g in circuit.gates} - {"CNOT", "X", "Rx", "Ry", "Rz", "U2"})
        raise CircuitError(f"expand macros before export; found {bad}")
    names = [f"{r.name}[{i}]" for r in circuit.registers for i in range(r.width)]
    lines: list[str] = []
    phase = circuit.global_phase
    for g in circuit.gates:
        q = [names[i] for i in g.qubits]
        if g.kind == "CNOT":
            lines.append(f"cx {q[0]},{q[1]};")
        elif g.kind == "X":
            # u3(pi, 0, pi) equals X exactly
            lines.append(f"u3({_fmt(math.pi)},0.0,{_fmt(math.pi)}) {q[0]};")
        elif g.kind == "Rz":
            lines.append(f"rz({_fmt(g.params[0])}) {q[0]};")
        elif g.kind == "Ry":
            lines.append(f"ry({_fmt(-g.params[0])}) {q[0]};")
        elif g.kind == "Rx":
            lines.append(f"rx({_fmt(-g.params[0])}) {q[0]};")
        else:
            theta, phi, lam, alpha = u3_params(g.matrix)
            phase += alpha
            lines.append(f"u3({_fmt(theta)},{_fmt(phi)},{_fmt(lam)}) {q[0]};")
    head = [_HEADER.rstrip("\n"), f"// global_phase {_fmt(phase)}"]
    for r in circuit.registers:
        if r.width:
            head.append(f"qreg {r.name}[{r.width}];" + ("  // ancilla" if r.role == ANCILLA else ""))
    return "\n".join(head + lines) + "\n"


_STMT = re.compile(r"^(cx|rx|ry|rz|u3)\s*(?:\(([^)]*)\))?\s+(.+);$")
_QREG = re.compile(r"^qreg\s+([A-Za-z_]\w*)\[(\d+)\];\s*(//\s*ancilla)?$")
_ARG = re.compile(r"^([A-Za-z_]\w*)\[(\d+)\]$")


def parse_qasm(text: str) -> Circuit:
    """Parse text produced by :func:`export_qasm` back into a Circuit.

    ``u3(pi, 0, pi)`` is read back as X; other u3 statements become U2.
    """
    registers: list[Register] = []
    offsets: dict[str, int] = {}
    width = 0
    phase = 0.0
    pending: list[tuple[str, list[float], list[str]]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("// global_phase"):
            phase = float(line.split()[-1])
            continue
        if line.startswith("//") or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = _QREG.match(line)
        if m:
            name, w = m.group(1), int(m.group(2))
            registers.append(Register(name, w, ANCILLA if m.group(3) else LOGICAL))
            offsets[name] = width
            width += w
            continue
        m = _STMT.match(line)
        if not m:
            raise CircuitError(f"unsupported QASM statement: {line!r}")
        params = [float(p) for p in m.group(2).split(",")] if m.group(2) else []
        args = [a.strip() for a in m.group(3).split(",")]
        pending.append((m.group(1), params, args))

    def index(arg: str) -> int:
        m = _ARG.match(arg)
        if not m or m.group(1) not in offsets:
            raise CircuitError(f"bad qubit argument {arg!r}")
        return offsets[m.group(1)] + int(m.group(2))

    gates: list[Gate] = []
    for op, params, args in pending:
        qs = tuple(index(a) for a in args)
        if op == "cx":
            gates.append(Gate("CNOT", qs))
        elif op == "rz":
            gates.append(Gate("Rz", qs, (params[0],)))
        elif op == "ry":
            gates.append(Gate("Ry", qs, (-params[0],)))
        elif op == "rx":
            gates.append(Gate("Rx", qs, (-params[0],)))
        elif params == [math.pi, 0.0, math.pi]:
            gates.append(Gate("X", qs))
        else:
            gates.append(u2_gate(qs[0], u3_matrix(*params)))
    return Circuit(tuple(registers), tuple(gates), phase)
