"""Builders for the ansatz, QFT, kinetic phase and implicit-step circuits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .statevector import CircuitSpec, ConfigurationError, Gate, GateKind, StateVector, UsageError

DEFAULT_BOUNDS = (-2 * np.pi, 2 * np.pi)


def parameter_count(n: int, d: int) -> int:
    return 2 * n * (d + 1)


@dataclass(frozen=True)
class AnsatzParams:
    """Rotation angles of the ansatz, laid out layer by layer.

    Each layer holds ``n`` RX angles followed by ``n`` RZ angles, indexed by
    qubit; there are ``d + 1`` layers.
    """

    lam: np.ndarray
    n: int
    d: int
    bounds: tuple[float, float] = DEFAULT_BOUNDS

    def __post_init__(self):
        lam = np.array(self.lam, dtype=np.float64).ravel()
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        if self.n < 1 or self.d < 0:
            raise UsageError(f"invalid ansatz shape n={self.n}, d={self.d}")
        if self.d > 0 and self.n < 2:
            raise UsageError("entangling layers need at least two qubits")
        if lam.shape[0] != parameter_count(self.n, self.d):
            raise UsageError(f"expected {parameter_count(self.n, self.d)} parameters, got {lam.shape[0]}")
        lo, hi = self.bounds
        if not lo < hi:
            raise UsageError(f"empty bounds {self.bounds}")
        if np.any(lam < lo) or np.any(lam > hi):
            raise UsageError("parameters outside their bounds")

    @classmethod
    def zeros(cls, n: int, d: int, bounds=DEFAULT_BOUNDS) -> AnsatzParams:
        return cls(np.zeros(parameter_count(n, d)), n, d, bounds)

    def with_lambda(self, lam) -> AnsatzParams:
        return AnsatzParams(lam, self.n, self.d, self.bounds)


def _ansatz(params: AnsatzParams, sign: float) -> CircuitSpec:
    n, lam = params.n, params.lam
    gates = []
    k = 0
    for layer in range(params.d + 1):
        if layer > 0:
            gates += [Gate(GateKind.CNOT, (q, q + 1)) for q in range(n - 1)]
            gates.append(Gate(GateKind.CNOT, (n - 1, 0)))
        gates += [Gate(GateKind.RX, (q,), sign * lam[k + q]) for q in range(n)]
        gates += [Gate(GateKind.RZ, (q,), sign * lam[k + n + q]) for q in range(n)]
        k += 2 * n
    return CircuitSpec(tuple(gates), n)


def build_ansatz(params: AnsatzParams) -> CircuitSpec:
    return _ansatz(params, 1.0)


def build_ansatz_conjugate(params: AnsatzParams) -> CircuitSpec:
    """Ansatz with every rotation angle negated; prepares conj(U|0>)."""
    return _ansatz(params, -1.0)


def ansatz_state(params: AnsatzParams, conjugate: bool = False) -> StateVector:
    """Fast path for ``run(build_ansatz(params))`` using the fused kernel."""
    amps = kernels.ansatz_state(params.lam, params.n, params.d, -1.0 if conjugate else 1.0)
    return StateVector(amps, params.n)


def build_qft(n: int) -> CircuitSpec:
    """QFT with entries exp(+2 pi i j k / 2^n) / 2^(n/2), qubit reversal included."""
    if n < 1:
        raise ConfigurationError("QFT needs at least one qubit")
    gates = []
    for j in reversed(range(n)):
        gates.append(Gate(GateKind.H, (j,)))
        for m in reversed(range(j)):
            gates.append(Gate(GateKind.CPHASE, (m, j), np.pi / 2 ** (j - m)))
    gates += [Gate(GateKind.SWAP, (q, n - 1 - q)) for q in range(n // 2)]
    return CircuitSpec(tuple(gates), n)


@dataclass(frozen=True)
class KineticPhaseSpec:
    n: int
    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise UsageError("gamma must be finite")

    @classmethod
    def from_timestep(cls, n: int, dt: float) -> KineticPhaseSpec:
        return cls(n, -dt / 2.0)


def build_kinetic_phase(spec: KineticPhaseSpec) -> CircuitSpec:
    """Diagonal exp(i gamma (m - 2^(n-1))^2) on basis |m>, up to a global phase.

    The global phase is exp(-i gamma 4^(n-1)).
    """
    n, g = spec.n, spec.gamma
    gates = []
    for i in range(n):
        for j in range(n):
            if i == j:
                gates.append(Gate(GateKind.PHASE, (i,), g * (2.0 ** (2 * i) - 2.0 ** (n + i))))
            else:
                gates.append(Gate(GateKind.CPHASE, (i, j), g * 2.0 ** (i + j)))
    return CircuitSpec(tuple(gates), n)


def build_fourier_propagator(n: int, dt: float) -> CircuitSpec:
    """QFT^dag X_(n-1) U_ph X_(n-1) QFT, the implicit linear step."""
    if dt < 0:
        raise UsageError("time step must be non-negative")
    qft = build_qft(n)
    flip = CircuitSpec((Gate(GateKind.X, (n - 1,)),), n)
    return qft + flip + build_kinetic_phase(KineticPhaseSpec.from_timestep(n, dt)) + flip + qft.adjoint()


def build_tilde_u(params: AnsatzParams, dt: float) -> CircuitSpec:
    """Ansatz followed by the Fourier-space kinetic step."""
    return build_ansatz(params) + build_fourier_propagator(params.n, dt)
