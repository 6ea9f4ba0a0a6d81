"""Verification engines.

* phase-path: follows computational basis states through circuits made of
  permutation and diagonal gates, vectorized over a batch of inputs.
* dense: full statevector, for circuits up to ``dense_cap`` qubits.
* sparse: dict-of-basis-states simulation; used to extract the operator on
  the ancilla-zero subspace of circuits too wide for the dense engine.

Qubit 0 is the most significant bit of every basis index. The circuit's
global phase is folded into all results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate

DEFAULT_DENSE_CAP = 22
UNITARY_CAP = 12
_CLASSICAL_TOL = 1e-12


class NonPhaseClassicalGate(ValueError):
    """Raised by the phase-path engine on a gate that creates superpositions."""

    def __init__(self, gate: Gate, position: int):
        super().__init__(f"gate #{position} ({gate.kind} on {gate.qubits}) is not phase-classical")
        self.gate = gate
        self.position = position


class QubitCapExceeded(ValueError):
    pass


@dataclass
class BasisPath:
    basis_index: tuple[int, ...]
    phase: complex


def _single_qubit_kind(u: np.ndarray) -> str:
    if abs(u[0, 1]) <= _CLASSICAL_TOL and abs(u[1, 0]) <= _CLASSICAL_TOL:
        return "diag"
    if abs(u[0, 0]) <= _CLASSICAL_TOL and abs(u[1, 1]) <= _CLASSICAL_TOL:
        return "anti"
    return "general"


def is_phase_classical(circuit: Circuit) -> bool:
    for g in circuit.gates:
        if g.kind in ("Rx", "Ry", "U2") and _single_qubit_kind(g.matrix) == "general":
            return False
    return True


# phase-path engine -------------------------------------------------------------


def _classical_step(bits: np.ndarray, phase: np.ndarray, g: Gate, pos: int) -> None:
    """Apply one permutation/diagonal gate in place to (qubit, batch) bits."""
    k, q = g.kind, g.qubits
    if k == "CNOT":
        bits[q[1]] ^= bits[q[0]]
    elif k == "X":
        bits[q[0]] ^= 1
    elif k == "Toffoli":
        bits[q[2]] ^= bits[q[0]] & bits[q[1]]
    elif k == "Swap":
        bits[[q[0], q[1]]] = bits[[q[1], q[0]]]
    elif k == "Fredkin":
        diff = (bits[q[1]] ^ bits[q[2]]) & bits[q[0]]
        bits[q[1]] ^= diff
        bits[q[2]] ^= diff
    elif k == "Rz":
        half = 0.5 * g.params[0]
        phase *= np.where(bits[q[0]] == 1, np.exp(1j * half), np.exp(-1j * half))
    elif k == "Diag2":
        table = np.exp(1j * np.asarray(g.params))
        phase *= table[2 * bits[q[0]] + bits[q[1]]]
    else:
        u = g.matrix
        kind = _single_qubit_kind(u)
        b = bits[q[0]]
        if kind == "diag":
            phase *= np.where(b == 1, u[1, 1], u[0, 0])
        elif kind == "anti":
            phase *= np.where(b == 1, u[0, 1], u[1, 0])
            bits[q[0]] ^= 1
        else:
            raise NonPhaseClassicalGate(g, pos)


def phase_path_batch(circuit: Circuit, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run many basis inputs at once.

    Args:
        circuit: circuit of permutation/diagonal gates (macros allowed).
        inputs: (batch, num_qubits) array of 0/1.

    Returns:
        (outputs, phases): output bits with the same shape, and complex phases.
    """
    inputs = np.asarray(inputs, dtype=np.uint8)
    if inputs.ndim != 2 or inputs.shape[1] != circuit.num_qubits:
        raise ValueError(f"inputs must have shape (batch, {circuit.num_qubits})")
    bits = np.ascontiguousarray(inputs.T.copy())
    phase = np.full(inputs.shape[0], np.exp(1j * circuit.global_phase), dtype=complex)
    for pos, g in enumerate(circuit.gates):
        _classical_step(bits, phase, g, pos)
    return bits.T.copy(), phase


def simulate_phase_path(circuit: Circuit, bitstring: Sequence[int] | str) -> BasisPath:
    if isinstance(bitstring, str):
        bitstring = [int(c) for c in bitstring]
    out, phase = phase_path_batch(circuit, np.asarray([bitstring]))
    return BasisPath(tuple(int(b) for b in out[0]), complex(phase[0]))


# dense engine ------------------------------------------------------------------


def _controlled_view_index(m: int, controls: Sequence[int]) -> tuple:
    idx: list = [slice(None)] * (m + 1)
    for c in controls:
        idx[c] = 1
    return tuple(idx)


def _axis_in_view(q: int, controls: Sequence[int]) -> int:
    return q - sum(1 for c in controls if c < q)


def _apply_flip(psi: np.ndarray, m: int, target: int, controls: Sequence[int]) -> None:
    idx = _controlled_view_index(m, controls)
    ax = _axis_in_view(target, controls)
    view = psi[idx]
    psi[idx] = np.flip(view, axis=ax).copy()


def _apply_1q(psi: np.ndarray, m: int, u: np.ndarray, target: int) -> np.ndarray:
    new = np.tensordot(u, psi, axes=([1], [target]))
    return np.moveaxis(new, 0, target)


def _apply_gate_dense(psi: np.ndarray, m: int, g: Gate) -> np.ndarray:
    k, q = g.kind, g.qubits
    if k == "X":
        _apply_flip(psi, m, q[0], ())
    elif k == "CNOT":
        _apply_flip(psi, m, q[1], (q[0],))
    elif k == "Toffoli":
        _apply_flip(psi, m, q[2], (q[0], q[1]))
    elif k == "Swap":
        psi = np.ascontiguousarray(np.swapaxes(psi, q[0], q[1]))
    elif k == "Fredkin":
        idx = _controlled_view_index(m, (q[0],))
        a, b = _axis_in_view(q[1], (q[0],)), _axis_in_view(q[2], (q[0],))
        psi[idx] = np.swapaxes(psi[idx], a, b).copy()
    elif k == "Rz":
        shape = [1] * (m + 1)
        shape[q[0]] = 2
        half = 0.5 * g.params[0]
        psi *= np.array([np.exp(-1j * half), np.exp(1j * half)]).reshape(shape)
    elif k == "Diag2":
        table = np.exp(1j * np.asarray(g.params)).reshape(2, 2)
        if q[0] > q[1]:
            table = table.T
        shape = [1] * (m + 1)
        shape[q[0]] = 2
        shape[q[1]] = 2
        psi *= table.reshape(shape)
    else:
        psi = _apply_1q(psi, m, g.matrix, q[0])
    return psi


def _run_dense(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """states: (2**m, batch) -> (2**m, batch)."""
    m = circuit.num_qubits
    batch = states.shape[1]
    psi = np.array(states, dtype=complex).reshape((2,) * m + (batch,))
    for g in circuit.gates:
        psi = _apply_gate_dense(psi, m, g)
    return psi.reshape(2 ** m, batch) * np.exp(1j * circuit.global_phase)


def apply_dense(circuit: Circuit, state: np.ndarray, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Apply the circuit unitary to a statevector (or to the columns of a 2-D array)."""
    m = circuit.num_qubits
    if m > cap:
        raise QubitCapExceeded(f"{m} qubits exceeds dense cap {cap}")
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != 2 ** m:
        raise ValueError(f"state has {state.shape[0]} amplitudes, expected {2 ** m}")
    if state.ndim == 1:
        return _run_dense(circuit, state[:, None])[:, 0]
    return _run_dense(circuit, state)


def circuit_unitary(circuit: Circuit, cap: int = UNITARY_CAP) -> np.ndarray:
    m = circuit.num_qubits
    if m > cap:
        raise QubitCapExceeded(f"{m} qubits exceeds unitary cap {cap}")
    return _run_dense(circuit, np.eye(2 ** m, dtype=complex))


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float) -> tuple[bool, float]:
    """Compare two arrays modulo one unit phase, chosen from b's largest entry."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    i = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    lam = 1.0 + 0j
    if abs(a[i]) > 0 and abs(b[i]) > 0:
        lam = a[i] / b[i]
        lam /= abs(lam)
    dev = float(np.max(np.abs(a - lam * b))) if a.size else 0.0
    return dev <= tol, dev


# sparse engine -----------------------------------------------------------------


def _merge(rows: np.ndarray, amps: np.ndarray, prune: float) -> tuple[np.ndarray, np.ndarray]:
    packed = np.packbits(rows, axis=1)
    keys = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1]))).ravel()
    uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=complex)
    np.add.at(summed, inv.ravel(), amps)
    keep = np.abs(summed) > prune
    return rows[first][keep], summed[keep]


def apply_sparse(circuit: Circuit, rows: np.ndarray, amps: np.ndarray,
                 prune: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """Apply the circuit to a superposition of basis states.

    Args:
        rows: (K, num_qubits) 0/1 array, one basis state per row.
        amps: (K,) amplitudes.

    Returns:
        The output superposition in the same representation.
    """
    bits = np.asarray(rows, dtype=np.uint8).T.copy()
    amps = np.asarray(amps, dtype=complex).copy()
    for g in circuit.gates:
        q = g.qubits
        if g.kind in ("Rx", "Ry", "U2"):
            u = g.matrix
            kind = _single_qubit_kind(u)
            b = bits[q[0]]
            if kind == "diag":
                amps *= np.where(b == 1, u[1, 1], u[0, 0])
                continue
            if kind == "anti":
                amps *= np.where(b == 1, u[0, 1], u[1, 0])
                bits[q[0]] ^= 1
                continue
            zero, one = bits.copy(), bits.copy()
            zero[q[0]] = 0
            one[q[0]] = 1
            new_amps = np.concatenate([u[0, b] * amps, u[1, b] * amps])
            merged, amps = _merge(np.concatenate([zero.T, one.T]), new_amps, prune)
            bits = merged.T.copy()
            continue
        _classical_step(bits, amps, g, -1)
    return bits.T.copy(), amps * np.exp(1j * circuit.global_phase)


# restricted operators ----------------------------------------------------------


def logical_basis_rows(circuit: Circuit, logical_indices: Sequence[int]) -> np.ndarray:
    """Full-register bit rows for the given logical basis indices, ancillas 0."""
    logical = circuit.logical_qubits
    L = len(logical)
    idx = np.asarray(logical_indices, dtype=np.int64)
    rows = np.zeros((len(idx), circuit.num_qubits), dtype=np.uint8)
    for pos, q in enumerate(logical):
        rows[:, q] = (idx >> (L - 1 - pos)) & 1
    return rows


def restricted_operator(circuit: Circuit, engine: str = "auto",
                        dense_cap: int = DEFAULT_DENSE_CAP) -> tuple[np.ndarray, float]:
    """Operator on the ancilla-zero subspace, indexed by logical qubits.

    Returns (matrix, leakage) where leakage is the largest amplitude found
    outside the ancilla-zero subspace over all input columns.
    """
    logical = circuit.logical_qubits
    ancillas = circuit.ancilla_qubits
    L = len(logical)
    dim = 2 ** L
    if engine == "auto":
        engine = "dense" if circuit.num_qubits <= min(dense_cap, 16) else "sparse"
    mat = np.zeros((dim, dim), dtype=complex)
    leak = 0.0
    weights = (1 << np.arange(L - 1, -1, -1)).astype(np.int64)
    if engine == "dense":
        m = circuit.num_qubits
        if m > dense_cap:
            raise QubitCapExceeded(f"{m} qubits exceeds dense cap {dense_cap}")
        full_w = (1 << np.arange(m - 1, -1, -1)).astype(np.int64)
        rows = logical_basis_rows(circuit, range(dim))
        cols = rows.astype(np.int64) @ full_w
        states = np.zeros((2 ** m, dim), dtype=complex)
        states[cols, np.arange(dim)] = 1.0
        out = _run_dense(circuit, states)
        mat = out[cols, :]
        outside = np.ones(2 ** m, dtype=bool)
        outside[cols] = False
        leak = float(np.max(np.abs(out[outside]), initial=0.0))
        return mat, leak
    for j in range(dim):
        rows = logical_basis_rows(circuit, [j])
        out_rows, amps = apply_sparse(circuit, rows, np.ones(1))
        clean = np.all(out_rows[:, ancillas] == 0, axis=1) if ancillas else np.ones(len(amps), bool)
        if np.any(~clean):
            leak = max(leak, float(np.max(np.abs(amps[~clean]))))
        idx = out_rows[clean][:, logical].astype(np.int64) @ weights
        np.add.at(mat[:, j], idx, amps[clean])
    return mat, leak


def prepare_from_zero(circuit: Circuit) -> tuple[np.ndarray, float]:
    """Logical state produced from |0...0>, plus amplitude leaked into ancillas."""
    L = len(circuit.logical_qubits)
    rows = np.zeros((1, circuit.num_qubits), dtype=np.uint8)
    out_rows, amps = apply_sparse(circuit, rows, np.ones(1))
    anc = circuit.ancilla_qubits
    clean = np.all(out_rows[:, anc] == 0, axis=1) if anc else np.ones(len(amps), bool)
    state = np.zeros(2 ** L, dtype=complex)
    weights = (1 << np.arange(L - 1, -1, -1)).astype(np.int64)
    idx = out_rows[clean][:, circuit.logical_qubits].astype(np.int64) @ weights
    np.add.at(state, idx, amps[clean])
    leak = float(np.max(np.abs(amps[~clean]))) if np.any(~clean) else 0.0
    return state, leak


# verification reports ----------------------------------------------------------


@dataclass
class VerificationReport:
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    max_phase_error: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"checked": self.checked, "failures": self.failures,
                "max_phase_error": self.max_phase_error, "passed": self.passed}


def _bits_str(row: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in row)


def sample_logical_inputs(circuit: Circuit, trials: int | None, seed: int) -> np.ndarray:
    """Exhaustive logical indices when ``trials`` is None or covers the space."""
    L = len(circuit.logical_qubits)
    if trials is None or (L < 63 and trials >= 2 ** L):
        return logical_basis_rows(circuit, range(2 ** L))
    rng = np.random.Generator(np.random.Philox(seed))
    rows = np.zeros((trials, circuit.num_qubits), dtype=np.uint8)
    rows[:, circuit.logical_qubits] = rng.integers(0, 2, size=(trials, L), dtype=np.uint8)
    return rows


def verify_ancilla_restoration(circuit: Circuit, trials: int | None = 256, seed: int = 0,
                               tol: float = 1e-9) -> VerificationReport:
    """Check that ancillas come back to |0> for random logical basis inputs."""
    report = VerificationReport()
    anc = circuit.ancilla_qubits
    rows = sample_logical_inputs(circuit, trials, seed)
    report.checked = len(rows)
    if not anc:
        return report
    if is_phase_classical(circuit):
        out, _ = phase_path_batch(circuit, rows)
        bad = np.nonzero(np.any(out[:, anc] != 0, axis=1))[0]
        for i in bad[:10]:
            report.failures.append({"input": _bits_str(rows[i]), "output": _bits_str(out[i]),
                                    "reason": "ancilla not restored"})
        return report
    for row in rows:
        out_rows, amps = apply_sparse(circuit, row[None, :], np.ones(1))
        dirty = np.any(out_rows[:, anc] != 0, axis=1)
        weight = float(np.sum(np.abs(amps[dirty]) ** 2))
        if weight > tol:
            report.failures.append({"input": _bits_str(row), "reason": "ancilla not restored",
                                    "ancilla_weight": weight})
            break
    return report


def verify_phase_function(circuit: Circuit, expected_phase, trials: int | None, seed: int,
                          tol: float = 1e-9) -> VerificationReport:
    """Phase-path check of a diagonal circuit against ``expected_phase(rows)``.

    ``expected_phase`` maps a (batch, num_qubits) input array to complex
    phases. Agreement is required up to a single global phase, fixed by the
    first input.
    """
    rows = sample_logical_inputs(circuit, trials, seed)
    out, got = phase_path_batch(circuit, rows)
    want = np.asarray(expected_phase(rows), dtype=complex)
    ref = got[0] / want[0]
    err = np.abs(got - ref * want)
    report = VerificationReport(checked=len(rows), max_phase_error=float(err.max(initial=0.0)))
    moved = np.any(out != rows, axis=1)
    for i in np.nonzero(moved | (err > tol))[0][:10]:
        report.failures.append({
            "input": _bits_str(rows[i]), "output": _bits_str(out[i]),
            "expected_phase": [float(want[i].real * ref.real - want[i].imag * ref.imag),
                               float(want[i].real * ref.imag + want[i].imag * ref.real)],
            "got_phase": [float(got[i].real), float(got[i].imag)],
        })
    return report


def phase_angle(z: complex) -> float:
    return math.atan2(z.imag, z.real)


def _logical_index(circuit: Circuit, rows: np.ndarray) -> np.ndarray:
    logical = circuit.logical_qubits
    weights = (1 << np.arange(len(logical) - 1, -1, -1)).astype(np.int64)
    return rows[:, logical].astype(np.int64) @ weights


def _power_column(op: np.ndarray, copies: int, j: int) -> np.ndarray:
    n = op.shape[0].bit_length() - 1
    col = np.ones(1, dtype=complex)
    for c in range(copies):
        part = (j >> (n * (copies - 1 - c))) & ((1 << n) - 1)
        col = np.kron(col, op[:, part])
    return col


def verify_tensor_power(circuit: Circuit, op: np.ndarray, copies: int, trials: int | None,
                        seed: int, tol: float = 1e-8,
                        dense_cap: int = DEFAULT_DENSE_CAP) -> VerificationReport:
    """Check the circuit acts as op^(tensor copies) on the ancilla-zero subspace.

    Columns are compared up to one global phase, taken from the first column
    checked. Amplitude left on nonzero ancillas counts as error.
    """
    op = np.asarray(op, dtype=complex)
    L = len(circuit.logical_qubits)
    if (op.shape[0].bit_length() - 1) * copies != L:
        raise ValueError(f"operator of size {op.shape[0]} x{copies} does not fit {L} logical qubits")
    rows = sample_logical_inputs(circuit, trials, seed)
    idx = _logical_index(circuit, rows)
    report = VerificationReport(checked=len(rows))
    if len(rows) == 2 ** L and circuit.num_qubits <= min(dense_cap, 16):
        mat, leak = restricted_operator(circuit, "dense")
        cols = [(int(j), mat[:, j], leak) for j in idx]
    else:
        cols = []
        for row, j in zip(rows, idx):
            m, leak = restricted_operator_column(circuit, row)
            cols.append((int(j), m, leak))
    ref = None
    for j, got, leak in cols:
        want = _power_column(op, copies, j)
        if ref is None:
            overlap = np.vdot(want, got)
            ref = overlap / abs(overlap) if abs(overlap) > 1e-12 else 1.0
        err = float(np.max(np.abs(got - ref * want))) + leak
        report.max_phase_error = max(report.max_phase_error, err)
        if err > tol and len(report.failures) < 10:
            k = int(np.argmax(np.abs(got - ref * want)))
            report.failures.append({
                "input": format(j, f"0{L}b"), "output": format(k, f"0{L}b"),
                "expected_phase": [float((ref * want[k]).real), float((ref * want[k]).imag)],
                "got_phase": [float(got[k].real), float(got[k].imag)], "error": err,
            })
    return report


def restricted_operator_column(circuit: Circuit, row: np.ndarray) -> tuple[np.ndarray, float]:
    """Sparse-simulate one basis input; return its ancilla-zero column and leakage."""
    logical, anc = circuit.logical_qubits, circuit.ancilla_qubits
    out_rows, amps = apply_sparse(circuit, np.asarray(row, dtype=np.uint8)[None, :], np.ones(1))
    clean = np.all(out_rows[:, anc] == 0, axis=1) if anc else np.ones(len(amps), bool)
    col = np.zeros(2 ** len(logical), dtype=complex)
    np.add.at(col, _logical_index(circuit, out_rows[clean]), amps[clean])
    leak = float(np.max(np.abs(amps[~clean]), initial=0.0))
    return col, leak


def verify_state_power(circuit: Circuit, psi: np.ndarray, copies: int,
                       tol: float = 1e-9) -> VerificationReport:
    """Fidelity of the state prepared from |0...0> against psi^(tensor copies)."""
    want = np.ones(1, dtype=complex)
    for _ in range(copies):
        want = np.kron(want, np.asarray(psi, dtype=complex))
    got, leak = prepare_from_zero(circuit)
    fid = float(abs(np.vdot(want, got)) ** 2)
    report = VerificationReport(checked=1, max_phase_error=max(1 - fid, leak))
    if 1 - fid > tol or leak > tol:
        report.failures.append({"input": "0" * len(circuit.logical_qubits), "fidelity": fid,
                                "leakage": leak})
    return report
