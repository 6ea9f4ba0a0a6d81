import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from massprod.circuit import ANCILLA, CircuitBuilder, CircuitError, expand_macros
from massprod.qasm import export_qasm, parse_qasm
from massprod.simulator import circuit_unitary

import oracles


def test_single_cnot():
    b = CircuitBuilder()
    b.add_register("q", 2)
    b.cx(0, 1)
    text = export_qasm(b.build())
    assert sum(line.startswith("cx ") for line in text.splitlines()) == 1


def test_rz_angle_precision():
    b = CircuitBuilder()
    b.add_register("q", 1)
    b.rot("z", 0, math.pi / 2)
    lines = [l for l in export_qasm(b.build()).splitlines() if l.startswith("rz")]
    assert lines == [f"rz({math.pi / 2!r}) q[0];"]
    assert len(repr(math.pi / 2).replace(".", "")) >= 15


def test_rotation_signs_follow_qelib():
    b = CircuitBuilder()
    b.add_register("q", 1)
    b.rot("x", 0, 0.3)
    b.rot("y", 0, 0.5)
    text = export_qasm(b.build())
    assert "rx(-0.3) q[0];" in text and "ry(-0.5) q[0];" in text


def test_refuses_macros():
    b = CircuitBuilder()
    b.add_register("q", 3)
    b.ccx(0, 1, 2)
    with pytest.raises(CircuitError):
        export_qasm(b.build())


def test_roundtrip_identical_gates():
    b = CircuitBuilder()
    q = b.add_register("data", 3)
    a = b.add_register("anc", 1, ANCILLA)
    b.ccx(q[0], q[1], a[0])
    b.cswap(a[0], q[1], q[2])
    b.x(q[2])
    for axis, t in zip("xyz", (0.1, -2.2, 3.3)):
        b.rot(axis, q[1], t)
    c = expand_macros(b.build())
    back = parse_qasm(export_qasm(c))
    assert back.registers == c.registers
    kinds = [g.kind for g in back.gates]
    assert kinds == [g.kind for g in c.gates if g.kind != "U2"] or len(kinds) == len(c.gates)
    assert oracles.same_up_to_phase(circuit_unitary(back), circuit_unitary(c), 1e-10)
    assert np.allclose(circuit_unitary(back), circuit_unitary(c), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-6, 6), min_size=8, max_size=8))
def test_u2_roundtrip_keeps_phase(vals):
    z = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    if abs(np.linalg.det(z.reshape(2, 2))) < 1e-3:
        return
    u, _ = np.linalg.qr(z.reshape(2, 2))
    b = CircuitBuilder()
    b.add_register("q", 1)
    b.u2(0, u)
    c = b.build()
    back = parse_qasm(export_qasm(c))
    assert np.allclose(circuit_unitary(back), u, atol=1e-10)
