"""Cost function of the variational nonlinear step.

For trial state ``p = U(lam')|0>`` and the post-linear-step state ``w`` the
cost is::

    C = c * Im sum_j conj(p_j) |w_j|^2 w_j  -  Re sum_j conj(p_j) w_j

with ``c = s dt 2a / dx``. Since ``Im z = Re(-i z)`` this is ``Re <p|target>``
with ``target = -w - i c |w|^2 w``, which is what the fast path evaluates.
The circuit routes (Hadamard test and the three-register nonlinear unit) exist
to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuits import AnsatzParams, build_ansatz, build_ansatz_conjugate, build_tilde_u
from .statevector import (
    CircuitSpec,
    ConfigurationError,
    Gate,
    GateKind,
    MAX_QUBITS,
    UsageError,
    ancilla_z_expectation,
    run,
)


def cost_prefactor(s: float, dt: float, a: float, dx: float) -> float:
    return s * dt * 2 * a / dx


@dataclass(frozen=True)
class CostContext:
    """Fixed data of one time step's minimization."""

    psi_tilde: np.ndarray
    prefactor: float
    n: int
    d: int

    def __post_init__(self):
        w = np.array(self.psi_tilde, dtype=np.complex128)
        if w.shape != (1 << self.n,):
            raise UsageError(f"psi_tilde must have {1 << self.n} amplitudes")
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise UsageError("psi_tilde must have unit norm")
        w.setflags(write=False)
        object.__setattr__(self, "psi_tilde", w)
        target = -w - 1j * self.prefactor * np.abs(w) ** 2 * w
        target.setflags(write=False)
        object.__setattr__(self, "_target", target)

    @classmethod
    def from_circuit(cls, lambda_t: AnsatzParams, dt: float, prefactor: float) -> CostContext:
        """Context whose |psi~> comes from the Utilde circuit itself.

        The circuit realization carries a global phase relative to the FFT
        route; circuit-evaluated cost terms must be compared against this one.
        """
        w = run(build_tilde_u(lambda_t, dt)).amplitudes
        return cls(w, prefactor, lambda_t.n, lambda_t.d)

    @property
    def target(self) -> np.ndarray:
        return self._target

    def value(self, lam) -> float:
        """Cost at raw parameter vector ``lam`` (fast path)."""
        psi = kernels.ansatz_state(np.asarray(lam, dtype=np.float64), self.n, self.d)
        return float(np.real(np.vdot(psi, self._target)))

    def value_and_grad(self, lam, h: float = 1e-7, exact: bool = False):
        """Cost and its gradient; central differences of step ``h`` unless ``exact``."""
        return kernels.ansatz_overlap_grad(np.asarray(lam, dtype=np.float64), self.n, self.d,
                                           self._target, h, exact)

    def nonlinear_target(self) -> np.ndarray:
        """F applied to psi~, normalized: the exact minimizer over unit states."""
        w = self.psi_tilde
        fw = (1 + 1j * self.prefactor * np.abs(w) ** 2) * w
        return fw / np.linalg.norm(fw)


def _check_trial(ctx: CostContext, trial: AnsatzParams):
    if (trial.n, trial.d) != (ctx.n, ctx.d):
        raise UsageError(f"trial has shape n={trial.n}, d={trial.d}; context expects n={ctx.n}, d={ctx.d}")


def cost_direct(ctx: CostContext, trial: AnsatzParams) -> float:
    _check_trial(ctx, trial)
    return ctx.value(trial.lam)


def cost_terms_direct(ctx: CostContext, trial: AnsatzParams) -> tuple[float, float]:
    """(Re<p|w>, Im sum conj(p)|w|^2 w) by plain vector arithmetic."""
    _check_trial(ctx, trial)
    p = kernels.ansatz_state(trial.lam, ctx.n, ctx.d)
    w = ctx.psi_tilde
    return float(np.real(np.vdot(p, w))), float(np.imag(np.vdot(p, np.abs(w) ** 2 * w)))


def cost_minimizer_consistency(ctx: CostContext, lambda_star: AnsatzParams) -> float:
    """Fidelity of U(lambda*)|0> with the normalized target F psi~."""
    _check_trial(ctx, lambda_star)
    p = kernels.ansatz_state(lambda_star.lam, ctx.n, ctx.d)
    return float(abs(np.vdot(p, ctx.nonlinear_target())) ** 2)


def _embed(circuit: CircuitSpec, offset: int, width: int) -> CircuitSpec:
    return circuit.remapped({q: q + offset for q in range(circuit.qubit_count)}, width)


def build_hadamard_test(lambda_t: AnsatzParams, trial: AnsatzParams, dt: float) -> CircuitSpec:
    """Ancilla is qubit 0, the work register occupies qubits 1..n."""
    n = lambda_t.n
    width = n + 1
    v = build_tilde_u(lambda_t, dt) + build_ansatz(trial).adjoint()
    h = CircuitSpec((Gate(GateKind.H, (0,)),), width)
    return h + _embed(v, 1, width).controlled(0) + h


def linear_term_hadamard(ctx: CostContext, lambda_t: AnsatzParams, trial: AnsatzParams, dt: float) -> float:
    """Re<psi(lam')|psi~(t)> read off the ancilla."""
    _check_trial(ctx, trial)
    return ancilla_z_expectation(run(build_hadamard_test(lambda_t, trial, dt)), 0)


def build_qnpu(lambda_t: AnsatzParams, trial: AnsatzParams, dt: float) -> CircuitSpec:
    """Three-register circuit for Im sum_j conj(p_j) |w_j|^2 w_j.

    Qubit 0 is the ancilla; registers A, B, C start at 1, n+1 and 2n+1.
    A holds psi~, B holds psi~ and C holds conj(p) on the ancilla's |1>
    branch; controlled fan-out of A into B and C then projects onto the
    diagonal, and the S-dagger selects the imaginary part.
    """
    n = lambda_t.n
    width = 3 * n + 1
    if width > MAX_QUBITS:
        raise ConfigurationError(f"nonlinear unit needs {width} qubits, limit is {MAX_QUBITS}")
    a, b, c = 1, n + 1, 2 * n + 1
    tilde = build_tilde_u(lambda_t, dt)
    gates = [Gate(GateKind.H, (0,)), Gate(GateKind.SDG, (0,))]
    gates += _embed(tilde, a, width).gates
    gates += _embed(tilde, b, width).controlled(0).gates
    gates += _embed(build_ansatz_conjugate(trial), c, width).controlled(0).gates
    gates += [Gate(GateKind.TOFFOLI, (0, a + q, b + q)) for q in range(n)]
    gates += [Gate(GateKind.TOFFOLI, (0, a + q, c + q)) for q in range(n)]
    gates.append(Gate(GateKind.H, (0,)))
    return CircuitSpec(tuple(gates), width)


def nonlinear_term_qnpu(ctx: CostContext, lambda_t: AnsatzParams, trial: AnsatzParams, dt: float) -> float:
    _check_trial(ctx, trial)
    return ancilla_z_expectation(run(build_qnpu(lambda_t, trial, dt)), 0)


def assemble_cost_from_circuits(ctx: CostContext, lambda_t: AnsatzParams, trial: AnsatzParams,
                                dt: float) -> float:
    lin = linear_term_hadamard(ctx, lambda_t, trial, dt)
    if ctx.prefactor == 0:
        return -lin
    return ctx.prefactor * nonlinear_term_qnpu(ctx, lambda_t, trial, dt) - lin


