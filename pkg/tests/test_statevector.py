import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsevqa.statevector import (
    CircuitSpec,
    ConfigurationError,
    Gate,
    GateKind as K,
    StateVector,
    UsageError,
    ancilla_z_expectation,
    apply_circuit,
    apply_gate,
    basis_state,
    gate_matrix,
    inner_product,
    zero_state,
)

from conftest import random_state

ALL_KINDS = {
    K.RX: 1, K.RZ: 1, K.H: 1, K.X: 1, K.S: 1, K.SDG: 1, K.PHASE: 1,
    K.CNOT: 2, K.CPHASE: 2, K.SWAP: 2, K.TOFFOLI: 3,
}
PARAMETRIC = {K.RX, K.RZ, K.PHASE, K.CPHASE}


def make_gate(kind, qubits, angle=0.7, controls=()):
    return Gate(kind, qubits, angle if kind in PARAMETRIC else None, controls)


def test_zero_state():
    assert np.array_equal(zero_state(1).amplitudes, [1, 0])
    assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    big = zero_state(19)
    assert len(big) == 524288 and big.amplitudes[0] == 1 and big.norm() == 1


@pytest.mark.parametrize("q", [0, 25, -1])
def test_zero_state_range(q):
    with pytest.raises(ConfigurationError):
        zero_state(q)


def test_bit_order_x_on_qubit0(backend):
    out = apply_gate(zero_state(2), Gate(K.X, (0,)))
    assert np.array_equal(out.amplitudes, [0, 1, 0, 0])


def test_rx_zero_is_identity(backend, rng):
    psi = StateVector(random_state(rng, 3))
    out = apply_gate(psi, Gate(K.RX, (1,), 0.0))
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


def test_hadamard(backend):
    out = apply_gate(zero_state(1), Gate(K.H, (0,)))
    np.testing.assert_allclose(out.amplitudes, [2 ** -0.5, 2 ** -0.5], atol=1e-15)


def test_apply_gate_does_not_mutate_input(backend):
    psi = zero_state(2)
    apply_gate(psi, Gate(K.X, (1,)))
    assert psi.amplitudes[0] == 1


def test_gate_validation():
    with pytest.raises(UsageError):
        Gate(K.CNOT, (0,))
    with pytest.raises(UsageError):
        Gate(K.CNOT, (1, 1))
    with pytest.raises(UsageError):
        Gate(K.RX, (0,))
    with pytest.raises(UsageError):
        Gate(K.H, (0,), 0.3)
    with pytest.raises(UsageError):
        apply_gate(zero_state(2), Gate(K.X, (2,)))
    with pytest.raises(UsageError):
        CircuitSpec((Gate(K.X, (3,)),), 2)


def test_apply_circuit(backend, rng):
    psi = zero_state(1)
    assert apply_circuit(psi, CircuitSpec((), 1)).amplitudes.tolist() == psi.amplitudes.tolist()
    hh = CircuitSpec((Gate(K.H, (0,)), Gate(K.H, (0,))), 1)
    np.testing.assert_allclose(apply_circuit(psi, hh).amplitudes, [1, 0], atol=1e-12)
    with pytest.raises(UsageError):
        apply_circuit(zero_state(2), hh)


def test_inner_product():
    a = zero_state(1)
    assert abs(inner_product(a, a) - 1) < 1e-12
    assert inner_product(a, basis_state(1, 1)) == 0
    h = apply_gate(a, Gate(K.H, (0,)))
    assert abs(inner_product(a, h) - 2 ** -0.5) < 1e-15
    # conjugate-linear in the first argument
    ia = StateVector(1j * a.amplitudes)
    assert abs(inner_product(ia, a) + 1j) < 1e-15
    with pytest.raises(UsageError):
        inner_product(a, zero_state(2))


def test_ancilla_z(backend):
    assert ancilla_z_expectation(zero_state(3), 1) == 1
    plus = apply_gate(zero_state(3), Gate(K.H, (2,)))
    assert abs(ancilla_z_expectation(plus, 2)) < 1e-12
    one = apply_gate(zero_state(3), Gate(K.X, (0,)))
    assert ancilla_z_expectation(one, 0) == -1
    with pytest.raises(UsageError):
        ancilla_z_expectation(one, 3)


def _all_placements(q, arity):
    import itertools
    return list(itertools.permutations(range(q), arity))


@pytest.mark.parametrize("kind", list(ALL_KINDS))
def test_gate_matrix_oracle(backend, kind, rng):
    for q in (1, 2, 3):
        arity = ALL_KINDS[kind]
        if arity > q:
            continue
        for qubits in _all_placements(q, arity):
            gate = make_gate(kind, qubits, rng.uniform(-4, 4))
            psi = random_state(rng, q)
            expected = gate_matrix(gate, q) @ psi
            got = apply_gate(StateVector(psi), gate).amplitudes
            np.testing.assert_allclose(got, expected, atol=1e-12)


def test_gate_matrix_oracle_extra_controls(backend, rng):
    gates = [
        make_gate(K.RX, (0,), 1.1, controls=(2,)),
        make_gate(K.SWAP, (0, 1), controls=(2,)),
        make_gate(K.CPHASE, (1, 0), 0.4, controls=(2,)),
        make_gate(K.SDG, (2,), controls=(0, 1)),
    ]
    for gate in gates:
        psi = random_state(rng, 3)
        np.testing.assert_allclose(apply_gate(StateVector(psi), gate).amplitudes,
                                   gate_matrix(gate, 3) @ psi, atol=1e-12)


def test_known_matrices():
    np.testing.assert_allclose(gate_matrix(Gate(K.RZ, (0,), 0.6), 1),
                               np.diag([np.exp(-0.3j), np.exp(0.3j)]), atol=1e-15)
    np.testing.assert_allclose(gate_matrix(Gate(K.SDG, (0,)), 1), np.diag([1, -1j]))
    np.testing.assert_allclose(gate_matrix(Gate(K.PHASE, (0,), 0.5), 1), np.diag([1, np.exp(0.5j)]))
    cnot = gate_matrix(Gate(K.CNOT, (0, 1)), 2)
    # control is qubit 0 (low bit): |01> -> |11>
    assert cnot[3, 1] == 1 and cnot[1, 3] == 1 and cnot[0, 0] == 1 and cnot[2, 2] == 1


gate_strategy = st.builds(
    lambda kind, perm, angle: (kind, perm, angle),
    st.sampled_from(list(ALL_KINDS)),
    st.permutations(list(range(6))),
    st.floats(-2 * np.pi, 2 * np.pi),
)


def _circuit(q, items):
    gates = []
    for kind, perm, angle in items:
        qubits = tuple(p for p in perm if p < q)[: ALL_KINDS[kind]]
        if len(qubits) == ALL_KINDS[kind]:
            gates.append(make_gate(kind, qubits, angle))
    return CircuitSpec(tuple(gates), q)


@settings(max_examples=60, deadline=None)
@given(q=st.integers(1, 6), items=st.lists(gate_strategy, max_size=30), seed=st.integers(0, 2 ** 32 - 1))
def test_unitarity_and_adjoint(q, items, seed):
    circ = _circuit(q, items)
    psi = StateVector(random_state(np.random.default_rng(seed), q))
    out = apply_circuit(psi, circ)
    assert abs(out.norm() - 1) < 1e-12
    back = apply_circuit(out, circ.adjoint())
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-10)


def test_random_20_gate_circuit_norm(backend, rng):
    items = [(rng.choice(list(ALL_KINDS)), rng.permutation(3), rng.uniform(-3, 3)) for _ in range(40)]
    circ = _circuit(3, items)
    out = apply_circuit(zero_state(3), CircuitSpec(circ.gates[:20], 3))
    assert abs(out.norm() - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(q=st.integers(1, 4), items=st.lists(gate_strategy, max_size=15), seed=st.integers(0, 2 ** 32 - 1))
def test_linearity(q, items, seed):
    rng = np.random.default_rng(seed)
    circ = _circuit(q, items)
    alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
    a, b = random_state(rng, q), random_state(rng, q)
    # columns of the circuit unitary via basis states
    cols = np.stack([apply_circuit(basis_state(j, q), circ).amplitudes for j in range(2 ** q)], axis=1)
    combo = alpha * a + beta * b
    lhs = cols @ combo
    rhs = alpha * apply_circuit(StateVector(a), circ).amplitudes + beta * apply_circuit(StateVector(b), circ).amplitudes
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_adjoint_swaps_s_and_sdg():
    circ = CircuitSpec((Gate(K.SDG, (0,)), Gate(K.RX, (1,), 0.3)), 2)
    adj = circ.adjoint()
    assert [g.kind for g in adj.gates] == [K.RX, K.S]
    assert adj.gates[0].angle == -0.3


def test_dense_circuit_product_oracle(backend, rng):
    items = [(rng.choice(list(ALL_KINDS)), rng.permutation(3), rng.uniform(-3, 3)) for _ in range(25)]
    circ = _circuit(3, items)
    dense = np.eye(8, dtype=complex)
    for g in circ.gates:
        dense = gate_matrix(g, 3) @ dense
    np.testing.assert_allclose(circ.unitary(), dense, atol=1e-12)
