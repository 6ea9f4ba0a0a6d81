import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from massprod.circuit import CircuitBuilder, cnot_count, gate_counts
from massprod.instances import haar_unitary, random_state, rng_for
from massprod.simulator import circuit_unitary
from massprod.toolbox import (
    MultiplexedRotation,
    Multiplexor1,
    PhaseFunction,
    SynthesisError,
    cosine_sine_decompose,
    demultiplex_1data,
    diagonal_layers,
    lift_bar,
    qsd_factors,
    qsd_synthesize,
    state_prep_angles,
    synth_diagonal,
    synth_multiplexed_rotation,
    synth_multiplexor1,
    synth_state_prep_single,
    zyz_decompose,
)

angle = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


# lift ------------------------------------------------------------------------

def test_lift_of_zero():
    assert np.all(lift_bar(PhaseFunction(2, np.zeros(4))).angles == 0)


def test_lift_small_example():
    a, b = math.pi / 3, math.pi / 5
    out = lift_bar(PhaseFunction(1, [a, b])).angles
    # c is the low-order bit: index 2x + c
    assert np.allclose(out, [a, -a, b, -b])


@given(st.lists(angle, min_size=8, max_size=8))
def test_lift_conjugates_at_c1(vals):
    f = PhaseFunction(3, vals)
    g = lift_bar(f).values()
    assert np.allclose(g[1::2], np.conj(f.values())) and np.allclose(g[0::2], f.values())


# multiplexed rotations ---------------------------------------------------------

def test_zero_selects_is_single_rotation():
    c = synth_multiplexed_rotation(MultiplexedRotation("y", [0.7]))
    assert cnot_count(c) == 0 and len(c.gates) == 1
    assert np.allclose(circuit_unitary(c), oracles.ry(0.7))


def test_one_select_ladder():
    t0, t1 = 0.4, -1.3
    c = synth_multiplexed_rotation(MultiplexedRotation("z", [t0, t1]))
    assert [g.kind for g in c.gates] == ["Rz", "CNOT", "Rz", "CNOT"]
    assert np.allclose([c.gates[0].params[0], c.gates[2].params[0]], [(t0 + t1) / 2, (t0 - t1) / 2])
    assert oracles.same_up_to_phase(circuit_unitary(c),
                                    oracles.block_diagonal([oracles.rz(t0), oracles.rz(t1)]), 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from("xyz"), st.integers(1, 4), st.data())
def test_multiplexed_rotation_matches_blocks(axis, s, data):
    angles = data.draw(st.lists(angle, min_size=2 ** s, max_size=2 ** s))
    c = synth_multiplexed_rotation(MultiplexedRotation(axis, angles))
    assert gate_counts(c)["CNOT"] == 2 ** s
    assert np.allclose(circuit_unitary(c), oracles.mux_rotation_matrix(axis, angles), atol=1e-10)


def test_bad_axis():
    with pytest.raises(SynthesisError):
        MultiplexedRotation("w", [0.0])


# diagonals ---------------------------------------------------------------------

def test_one_bit_diagonal():
    t0, t1 = 0.3, 1.1
    layers, phase = diagonal_layers(PhaseFunction(1, [t0, t1]))
    assert len(layers) == 1 and np.allclose(layers[0].angles, [t1 - t0])
    assert math.isclose(phase, (t0 + t1) / 2)


def test_constant_diagonal_is_phase():
    layers, phase = diagonal_layers(PhaseFunction(3, np.full(8, 0.9)))
    assert all(np.allclose(r.angles, 0) for r in layers)
    assert math.isclose(phase, 0.9)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.data())
def test_diagonal_exact(n, data):
    angles = np.array(data.draw(st.lists(angle, min_size=2 ** n, max_size=2 ** n)))
    c = synth_diagonal(PhaseFunction(n, angles))
    assert cnot_count(c) == 2 ** n - 2
    assert np.allclose(circuit_unitary(c), np.diag(np.exp(1j * angles)), atol=1e-10)


# ZYZ and single-data multiplexors --------------------------------------------------

def test_zyz_identity():
    z = zyz_decompose(np.eye(2))
    assert np.allclose([z.phi, z.alpha, z.beta, z.gamma], 0)


def test_zyz_rz_is_alpha_heavy():
    z = zyz_decompose(oracles.rz(0.8))
    assert np.allclose([z.phi, z.alpha, z.beta, z.gamma], [0, 0.8, 0, 0])


@pytest.mark.parametrize("u", [
    np.array([[1, 1], [1, -1]]) / math.sqrt(2),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, 1j], [1j, 0]]),
    np.diag([1j, -1]),
])
def test_zyz_reconstructs_special_cases(u):
    assert np.allclose(zyz_decompose(u).matrix(), u, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_zyz_reconstructs_random(seed):
    u = haar_unitary(2, rng_for(seed))
    z = zyz_decompose(u)
    assert 0 <= z.beta <= math.pi + 1e-12
    assert np.allclose(z.matrix(), u, atol=1e-12)


def test_demultiplex_identity_blocks():
    delta, rz1, ry_, rz2 = demultiplex_1data(Multiplexor1(np.array([np.eye(2)] * 4)))
    for part in (delta, rz1, ry_, rz2):
        assert np.allclose(part.angles, 0)


def test_demultiplex_repeated_block_is_constant():
    u = haar_unitary(2, rng_for(3))
    parts = demultiplex_1data(Multiplexor1(np.array([u] * 4)))
    for part in parts:
        assert np.allclose(part.angles, part.angles[0])


@pytest.mark.parametrize("s", [0, 1, 2, 3])
def test_multiplexor1_synthesis(s):
    rng = rng_for(s)
    m = Multiplexor1(np.array([haar_unitary(2, rng) for _ in range(2 ** s)]))
    c = synth_multiplexor1(m)
    assert np.allclose(circuit_unitary(c), oracles.block_diagonal(list(m.blocks)), atol=1e-10)
    if s:
        assert cnot_count(c) == 3 * 2 ** s + 2 ** s - 2


# CSD and QSD ---------------------------------------------------------------------

def test_csd_block_diagonal_has_zero_angles():
    rng = rng_for(1)
    a, b = haar_unitary(2, rng), haar_unitary(2, rng)
    r = cosine_sine_decompose(oracles.block_diagonal([a, b]))
    assert np.allclose(np.sin(r.theta / 2), 0, atol=1e-10)
    assert np.allclose(r.reassemble(), oracles.block_diagonal([a, b]), atol=1e-10)


def test_csd_of_multiplexed_ry():
    angles = np.array([0.3, 1.2])
    u = MultiplexedRotation("y", angles).matrix()
    # permute so that the rotation acts on the top qubit
    perm = [0, 2, 1, 3]
    top = u[np.ix_(perm, perm)]
    r = cosine_sine_decompose(top)
    assert np.allclose(r.reassemble(), top, atol=1e-10)
    assert np.allclose(np.sort(np.abs(np.sin(r.theta / 2))), np.sort(np.abs(np.sin(angles / 2))))


@pytest.mark.parametrize("n", [2, 3])
def test_csd_random(n):
    u = haar_unitary(2 ** n, rng_for(10 + n))
    assert np.allclose(cosine_sine_decompose(u).reassemble(), u, atol=1e-8)


def test_qsd_one_qubit():
    u = haar_unitary(2, rng_for(4))
    c = qsd_synthesize(u)
    assert len(c.gates) == 1 and cnot_count(c) == 0
    assert oracles.same_up_to_phase(circuit_unitary(c), u, 1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_qsd_factor_counts_and_matrix(n):
    u = haar_unitary(2 ** n, rng_for(20 + n))
    factors = qsd_factors(u)
    assert sum(f.kind == "mux" for f in factors) == 2 ** (n - 1)
    assert sum(f.kind == "ry" for f in factors) == 2 ** (n - 1) - 1
    assert all(len(f.selects) == n - 1 for f in factors)
    assert oracles.same_up_to_phase(circuit_unitary(qsd_synthesize(u)), u, 1e-8)


# state preparation -------------------------------------------------------------------

def test_zero_state_angles():
    sched = state_prep_angles(np.eye(8)[0])
    assert all(np.allclose(a, 0) for a in sched.ry + sched.rz)


def test_plus_state():
    c = synth_state_prep_single(np.array([1, 1]) / math.sqrt(2))
    assert cnot_count(c) == 0 and len(c.gates) <= 2
    psi = circuit_unitary(c)[:, 0]
    assert abs(np.vdot(psi, np.array([1, 1]) / math.sqrt(2))) ** 2 >= 1 - 1e-12


def test_three_qubit_count_and_ghz():
    ghz = np.zeros(8)
    ghz[[0, 7]] = 1 / math.sqrt(2)
    c = synth_state_prep_single(ghz)
    assert cnot_count(c) == sum(2 * 2 ** l for l in (1, 2)) == 12
    assert abs(np.vdot(ghz, circuit_unitary(c)[:, 0])) ** 2 >= 1 - 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_random_four_qubit_state(seed):
    psi = random_state(16, rng_for(seed))
    out = circuit_unitary(synth_state_prep_single(psi))[:, 0]
    assert np.allclose(out, psi, atol=1e-10)


def test_state_norm_checked():
    with pytest.raises(SynthesisError):
        state_prep_angles([1.0, 1.0])
