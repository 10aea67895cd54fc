"""Hybrid split-step / variational quantum solver for the 1D nonlinear Schrodinger equation."""

from .kernels import BACKEND_NAME
from .statevector import (
    CircuitSpec,
    ConfigurationError,
    Gate,
    GateKind,
    StateVector,
    UsageError,
    ancilla_z_expectation,
    apply_circuit,
    apply_gate,
    inner_product,
    zero_state,
)

__version__ = "0.1.0"
