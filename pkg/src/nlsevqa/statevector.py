"""Dense statevector simulation.

Conventions
-----------
Qubit ``q`` is bit ``q`` of the basis index, so qubit 0 is the least
significant bit. Rotations are ``RX(t) = exp(-i t X / 2)`` and
``RZ(t) = exp(-i t Z / 2)``; ``PHASE(t) = diag(1, e^{it})`` and
``SDG = diag(1, -i)``. With these choices negating every rotation angle of a
circuit built from RX, RZ and CNOT yields its complex conjugate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels

MAX_QUBITS = 24


class ConfigurationError(ValueError):
    """Raised for out-of-range sizes and invalid run configuration."""


class UsageError(ValueError):
    """Raised when an operation is applied to incompatible operands."""


class GateKind(enum.Enum):
    RX = "rx"
    RZ = "rz"
    H = "h"
    X = "x"
    S = "s"
    SDG = "sdg"
    PHASE = "phase"
    CNOT = "cnot"
    CPHASE = "cphase"
    TOFFOLI = "toffoli"
    SWAP = "swap"


_ARITY = {
    GateKind.RX: 1, GateKind.RZ: 1, GateKind.H: 1, GateKind.X: 1, GateKind.S: 1,
    GateKind.SDG: 1, GateKind.PHASE: 1, GateKind.CNOT: 2, GateKind.CPHASE: 2,
    GateKind.SWAP: 2, GateKind.TOFFOLI: 3,
}
_PARAMETRIC = {GateKind.RX, GateKind.RZ, GateKind.PHASE, GateKind.CPHASE}
_INVERSE_KIND = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S}

_SQRT_HALF = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``qubits`` lists the gate's own controls before its target. ``controls``
    holds additional control qubits, used when a whole circuit is made
    conditional on an ancilla.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if len(self.qubits) != _ARITY[self.kind]:
            raise UsageError(f"{self.kind.name} acts on {_ARITY[self.kind]} qubit(s), got {self.qubits}")
        if (self.angle is None) == (self.kind in _PARAMETRIC):
            raise UsageError(f"{self.kind.name}: angle must be given exactly for parametric gates")
        every = self.qubits + self.controls
        if len(set(every)) != len(every) or min(every) < 0:
            raise UsageError(f"qubit indices must be distinct and non-negative: {every}")

    @property
    def support(self) -> tuple[int, ...]:
        return self.controls + self.qubits

    def adjoint(self) -> Gate:
        angle = None if self.angle is None else -self.angle
        return Gate(_INVERSE_KIND.get(self.kind, self.kind), self.qubits, angle, self.controls)

    def with_controls(self, extra) -> Gate:
        return Gate(self.kind, self.qubits, self.angle, tuple(extra) + self.controls)

    def remapped(self, mapping) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle,
                    tuple(mapping[q] for q in self.controls))

    def primitive(self):
        """Lower to ``(op, target, second, cmask, 2x2 matrix as 4-vector)``."""
        cmask = 0
        for c in self.controls:
            cmask |= 1 << c
        k = self.kind
        if k is GateKind.SWAP:
            return kernels.OP_SWAP, self.qubits[0], self.qubits[1], cmask, np.zeros(4, complex)
        for c in self.qubits[:-1]:
            cmask |= 1 << c
        return kernels.OP_MATRIX, self.qubits[-1], 0, cmask, _matrix(k, self.angle)


def _matrix(kind, angle):
    if kind is GateKind.RX:
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([c, -1j * s, -1j * s, c])
    if kind is GateKind.RZ:
        return np.array([np.exp(-0.5j * angle), 0, 0, np.exp(0.5j * angle)])
    if kind is GateKind.H:
        return np.array([_SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF], dtype=complex)
    if kind in (GateKind.X, GateKind.CNOT, GateKind.TOFFOLI):
        return np.array([0, 1, 1, 0], dtype=complex)
    if kind is GateKind.S:
        return np.array([1, 0, 0, 1j])
    if kind is GateKind.SDG:
        return np.array([1, 0, 0, -1j])
    if kind in (GateKind.PHASE, GateKind.CPHASE):
        return np.array([1, 0, 0, np.exp(1j * angle)])
    raise UsageError(f"no 2x2 matrix for {kind}")


def gate_matrix(gate: Gate, qubit_count: int) -> np.ndarray:
    """Dense ``2^q x 2^q`` unitary of ``gate`` built by Kronecker products.

    Independent of the strided kernels; used as a test oracle for small q.
    """
    if max(gate.support) >= qubit_count:
        raise UsageError("gate addresses a qubit outside the register")
    eye2 = np.eye(2, dtype=complex)
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)

    def kron_all(ops):
        # ops[q] acts on qubit q; qubit 0 is the rightmost Kronecker factor
        out = np.ones((1, 1), dtype=complex)
        for q in reversed(range(qubit_count)):
            out = np.kron(out, ops.get(q, eye2))
        return out

    if gate.kind is GateKind.SWAP:
        a, b = gate.qubits
        xx = np.array([[0, 1], [1, 0]], dtype=complex)
        yy = np.array([[0, -1j], [1j, 0]])
        zz = np.diag([1.0, -1.0]).astype(complex)
        body = 0.5 * (kron_all({}) + kron_all({a: xx, b: xx}) + kron_all({a: yy, b: yy}) + kron_all({a: zz, b: zz}))
        controls = gate.controls
    else:
        target = gate.qubits[-1]
        body = kron_all({target: _matrix(gate.kind, gate.angle).reshape(2, 2)})
        controls = gate.controls + gate.qubits[:-1]
    if not controls:
        return body
    on = kron_all({c: p1 for c in controls})
    return on @ body + (np.eye(2 ** qubit_count) - on)


@dataclass(frozen=True)
class CircuitSpec:
    gates: tuple[Gate, ...]
    qubit_count: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        _check_qubits(self.qubit_count)
        for g in self.gates:
            if max(g.support) >= self.qubit_count:
                raise UsageError(f"{g} addresses a qubit outside a {self.qubit_count}-qubit register")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: CircuitSpec) -> CircuitSpec:
        if other.qubit_count != self.qubit_count:
            raise UsageError("cannot concatenate circuits of different width")
        return CircuitSpec(self.gates + other.gates, self.qubit_count)

    def adjoint(self) -> CircuitSpec:
        return CircuitSpec(tuple(g.adjoint() for g in reversed(self.gates)), self.qubit_count)

    def controlled(self, control: int, qubit_count: int | None = None) -> CircuitSpec:
        width = self.qubit_count if qubit_count is None else qubit_count
        return CircuitSpec(tuple(g.with_controls((control,)) for g in self.gates), width)

    def remapped(self, mapping, qubit_count: int) -> CircuitSpec:
        """Relabel qubit ``q`` as ``mapping[q]`` inside a ``qubit_count`` register."""
        return CircuitSpec(tuple(g.remapped(mapping) for g in self.gates), qubit_count)

    def count(self, kind: GateKind) -> int:
        return sum(g.kind is kind for g in self.gates)

    @cached_property
    def compiled(self):
        """Gate list lowered to flat arrays for ``kernels.apply_ops``."""
        m = len(self.gates)
        kinds = np.empty(m, dtype=np.int8)
        t0 = np.empty(m, dtype=np.int32)
        t1 = np.empty(m, dtype=np.int32)
        cmask = np.empty(m, dtype=np.int64)
        mats = np.empty((m, 4), dtype=np.complex128)
        for i, g in enumerate(self.gates):
            kinds[i], t0[i], t1[i], cmask[i], mats[i] = g.primitive()
        return kinds, t0, t1, cmask, mats

    def unitary(self) -> np.ndarray:
        """Dense matrix, column ``j`` = circuit applied to basis state ``j``."""
        dim = 1 << self.qubit_count
        cols = np.eye(dim, dtype=np.complex128)
        for j in range(dim):
            kernels.apply_ops(cols[j], self.compiled)
        return cols.T.copy()


def _check_qubits(q):
    if not (1 <= q <= MAX_QUBITS):
        raise ConfigurationError(f"qubit count must be in [1, {MAX_QUBITS}], got {q}")


@dataclass
class StateVector:
    amplitudes: np.ndarray
    qubit_count: int = field(default=-1)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        q = int(amps.shape[0]).bit_length() - 1
        if amps.ndim != 1 or amps.shape[0] != 1 << q:
            raise UsageError("amplitude count must be a power of two")
        if self.qubit_count not in (-1, q):
            raise UsageError(f"{amps.shape[0]} amplitudes do not describe {self.qubit_count} qubits")
        _check_qubits(q)
        self.amplitudes = amps
        self.qubit_count = q

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.qubit_count)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self):
        return self.amplitudes.shape[0]


def zero_state(q: int) -> StateVector:
    _check_qubits(q)
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, q)


def basis_state(index: int, q: int) -> StateVector:
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, q)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    if max(gate.support) >= state.qubit_count:
        raise UsageError(f"{gate} addresses a qubit outside a {state.qubit_count}-qubit state")
    out = state.copy()
    op, t0, t1, cmask, m = gate.primitive()
    if op == kernels.OP_SWAP:
        kernels.apply_swap(out.amplitudes, t0, t1, cmask)
    else:
        kernels.apply_matrix(out.amplitudes, t0, cmask, m)
    return out


def apply_circuit(state: StateVector, circuit: CircuitSpec) -> StateVector:
    if circuit.qubit_count != state.qubit_count:
        raise UsageError(f"circuit width {circuit.qubit_count} != state width {state.qubit_count}")
    out = state.copy()
    if circuit.gates:
        kernels.apply_ops(out.amplitudes, circuit.compiled)
    return out


def run(circuit: CircuitSpec) -> StateVector:
    """Circuit applied to |0...0>."""
    return apply_circuit(zero_state(circuit.qubit_count), circuit)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.qubit_count != b.qubit_count:
        raise UsageError("inner product of states with different qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def ancilla_z_expectation(state: StateVector, ancilla: int) -> float:
    if not 0 <= ancilla < state.qubit_count:
        raise UsageError(f"ancilla index {ancilla} out of range")
    probs = (np.abs(state.amplitudes) ** 2).reshape(-1, 2, 1 << ancilla)
    return float(probs[:, 0, :].sum() - probs[:, 1, :].sum())
