import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from massprod.circuit import ANCILLA, Circuit, CircuitBuilder, Gate, Register
from massprod.simulator import (
    NonPhaseClassicalGate,
    QubitCapExceeded,
    apply_dense,
    apply_sparse,
    circuit_unitary,
    equal_up_to_global_phase,
    phase_path_batch,
    restricted_operator,
    simulate_phase_path,
    verify_ancilla_restoration,
    verify_phase_function,
    verify_tensor_power,
)


def test_cnot_path():
    b = CircuitBuilder()
    b.add_register("q", 2)
    b.cx(0, 1)
    p = simulate_phase_path(b.build(), "10")
    assert list(p.basis_index) == [1, 1] and abs(p.phase - 1) < 1e-15


def test_rz_path_phase():
    b = CircuitBuilder()
    b.add_register("q", 1)
    b.rot("z", 0, 0.8)
    p = simulate_phase_path(b.build(), "1")
    assert list(p.basis_index) == [1] and abs(p.phase - np.exp(0.4j)) < 1e-15


def test_path_rejects_mixing_gate():
    b = CircuitBuilder()
    b.add_register("q", 1)
    b.rot("y", 0, 0.3)
    with pytest.raises(NonPhaseClassicalGate):
        simulate_phase_path(b.build(), "0")


def test_empty_dense():
    c = Circuit((Register("q", 2),))
    psi = np.array([0.5, 0.5j, -0.5, 0.5])
    assert np.allclose(apply_dense(c, psi), psi)


def test_dense_cap():
    c = Circuit((Register("q", 5),))
    with pytest.raises(QubitCapExceeded):
        apply_dense(c, np.eye(32)[0], cap=4)


def test_cnot_unitary():
    b = CircuitBuilder()
    b.add_register("q", 2)
    b.cx(0, 1)
    assert np.array_equal(circuit_unitary(b.build()), np.eye(4)[[0, 1, 3, 2]])


def test_equal_up_to_phase_cases():
    u = np.linalg.qr(np.arange(16).reshape(4, 4) + 1j * np.eye(4))[0]
    assert equal_up_to_global_phase(np.exp(1j * math.pi / 7) * u, u, 1e-12)[0]
    assert not equal_up_to_global_phase(np.eye(2), np.array([[0, 1], [1, 0]]), 1e-12)[0]


def random_circuit(rng, width, depth, classical=False):
    gates = []
    for _ in range(depth):
        kind = rng.choice(["CNOT", "X", "Rz", "Toffoli", "Fredkin", "Diag2"] +
                          ([] if classical else ["Rx", "Ry", "U2"]))
        arity = {"CNOT": 2, "Diag2": 2, "Toffoli": 3, "Fredkin": 3}.get(kind, 1)
        qs = tuple(int(q) for q in rng.permutation(width)[:arity])
        if kind == "U2":
            z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            from massprod.circuit import u2_gate
            gates.append(u2_gate(qs[0], np.linalg.qr(z)[0]))
            continue
        n = {"Rx": 1, "Ry": 1, "Rz": 1, "Diag2": 4}.get(kind, 0)
        gates.append(Gate(kind, qs, tuple(rng.normal(size=n))))
    return Circuit((Register("q", width),), tuple(gates), float(rng.normal()))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_dense_agrees_with_unitary(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 3, 10)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    assert np.allclose(apply_dense(c, psi), circuit_unitary(c) @ psi, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_phase_path_agrees_with_dense(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 4, 12, classical=True)
    u = circuit_unitary(c)
    inputs = (np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1
    out, ph = phase_path_batch(c, inputs.astype(np.uint8))
    idx = out.astype(int) @ (1 << np.arange(3, -1, -1))
    assert np.allclose(u[idx, np.arange(16)], ph, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_sparse_agrees_with_dense(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 4, 12)
    u = circuit_unitary(c)
    j = int(rng.integers(16))
    rows, amps = apply_sparse(c, (np.array([[j >> 3, j >> 2, j >> 1, j]]) & 1).astype(np.uint8),
                              np.ones(1))
    col = np.zeros(16, dtype=complex)
    np.add.at(col, rows.astype(int) @ (1 << np.arange(3, -1, -1)), amps)
    assert np.allclose(col, u[:, j], atol=1e-10)


def _with_ancilla(flip):
    b = CircuitBuilder()
    q = b.add_register("q", 2)
    a = b.add_register("a", 1, ANCILLA)
    b.ccx(q[0], q[1], a[0])
    b.rot("z", a[0], 0.6)
    if not flip:
        b.ccx(q[0], q[1], a[0])
    return b.build()


def test_no_ancilla_passes_vacuously():
    b = CircuitBuilder()
    b.add_register("q", 2)
    assert verify_ancilla_restoration(b.build()).passed


def test_ancilla_witness():
    rep = verify_ancilla_restoration(_with_ancilla(True), None)
    assert not rep.passed and rep.failures[0]["input"].startswith("11")
    assert verify_ancilla_restoration(_with_ancilla(False), None).passed


def test_engines_agree_on_restricted_operator():
    c = _with_ancilla(False)
    dense, leak_d = restricted_operator(c, "dense")
    sparse, leak_s = restricted_operator(c, "sparse")
    assert np.allclose(dense, sparse) and leak_d == leak_s == 0
    assert np.allclose(dense, np.exp(-0.3j) * np.diag([1, 1, 1, np.exp(0.6j)]))


def test_phase_function_report_and_witness():
    c = _with_ancilla(False)

    def good(rows):
        return np.where(rows[:, 0] & rows[:, 1], np.exp(0.6j), 1.0)

    assert verify_phase_function(c, good, None, 0).passed
    bad = verify_phase_function(c, lambda rows: np.ones(len(rows)), None, 0)
    assert not bad.passed and bad.failures[0]["input"] == "110"
    assert bad.max_phase_error > 0.2


def test_tensor_power_check():
    b = CircuitBuilder()
    x0 = b.add_register("x0", 1)
    x1 = b.add_register("x1", 1)
    b.rot("y", x0[0], 0.4)
    b.rot("y", x1[0], 0.4)
    c = b.build()
    assert verify_tensor_power(c, oracles.ry(0.4), 2, None, 0).passed
    assert not verify_tensor_power(c, oracles.ry(0.5), 2, None, 0).passed
