"""Classical split-step solver, soliton reference solutions and the RMSE metric.

The domain is ``[-pi, pi)`` with ``M = 2^n`` points. Forward FFTs are unscaled
and inverse FFTs carry the ``1/M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .statevector import UsageError

DOMAIN_LENGTH = 2 * np.pi


@dataclass(frozen=True)
class Grid:
    M: int
    x: np.ndarray = field(init=False, repr=False, compare=False)
    dx: float = field(init=False, repr=False, compare=False)
    k: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 2 or self.M & (self.M - 1):
            raise UsageError(f"grid size must be a power of two, got {self.M}")
        j = np.arange(self.M)
        object.__setattr__(self, "x", -np.pi + 2 * np.pi * j / self.M)
        object.__setattr__(self, "dx", 2 * np.pi / self.M)
        # wavenumbers in fftshift order: k_j = j - M/2
        object.__setattr__(self, "k", (j - self.M // 2).astype(np.float64))

    @classmethod
    def for_qubits(cls, n: int) -> Grid:
        return cls(2 ** n)

    @property
    def n(self) -> int:
        return self.M.bit_length() - 1


@dataclass
class WaveField:
    psi: np.ndarray
    grid: Grid
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.complex128)
        if self.psi.shape != (self.grid.M,):
            raise UsageError(f"field has {self.psi.shape} samples, grid has {self.grid.M}")

    def norm2(self) -> float:
        """Discrete integral of |psi|^2."""
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)


@dataclass(frozen=True)
class SolitonSpec:
    a: float = 2.0
    v: float = 10.0
    x0: float = -1.0
    s: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise UsageError("soliton amplitude must be positive")


def _soliton(spec: SolitonSpec, x, t):
    a, v, x0 = spec.a, spec.v, spec.x0
    envelope = a / np.cosh(a * (x - x0 - v * t))
    return envelope * np.exp(1j * v * (x - x0) + 0.5j * (a * a - v * v) * t)


def _periodized(spec: SolitonSpec, grid: Grid, t: float) -> np.ndarray:
    # keep the image x + kL of largest modulus; the window always contains the peak image
    K = math.ceil((abs(spec.x0) + spec.v * t) / DOMAIN_LENGTH) + 1
    images = np.stack([_soliton(spec, grid.x + k * DOMAIN_LENGTH, t) for k in range(-K, K + 1)])
    best = np.argmax(np.abs(images), axis=0)
    return images[best, np.arange(grid.M)]


def initial_condition(spec: SolitonSpec, grid: Grid) -> WaveField:
    return WaveField(_periodized(spec, grid, 0.0), grid, 0.0)


def analytic_solution(spec: SolitonSpec, grid: Grid, t: float) -> WaveField:
    if spec.s != 1:
        raise ValueError("analytic oracle defined for s=1 only")
    return WaveField(_periodized(spec, grid, t), grid, t)


def kinetic_factor(grid: Grid, dt: float) -> np.ndarray:
    """exp(-i k^2 dt / 2) in unshifted FFT order."""
    k = np.fft.ifftshift(grid.k)
    return np.exp(-0.5j * k * k * dt)


def implicit_substep(field: WaveField, dt: float) -> WaveField:
    if dt < 0:
        raise UsageError("time step must be non-negative")
    psi = np.fft.ifft(kinetic_factor(field.grid, dt) * np.fft.fft(field.psi))
    return WaveField(psi, field.grid, field.time)


def explicit_substep(field: WaveField, dt: float, s: float) -> WaveField:
    psi = field.psi
    return WaveField(psi * (1 + 1j * s * dt * np.abs(psi) ** 2), field.grid, field.time)


def step(field: WaveField, dt: float, s: float) -> WaveField:
    out = explicit_substep(implicit_substep(field, dt), dt, s)
    out.time = field.time + dt
    return out


def step_normalized(field: WaveField, dt: float, s: float, target_norm: float) -> WaveField:
    out = step(field, dt, s)
    out.psi *= np.sqrt(target_norm / out.norm2())
    return out


def evolve(field: WaveField, dt: float, s: float, steps: int, target_norm: float | None = None):
    """Yield the field after each of ``steps`` steps; time is ``m * dt`` exactly."""
    t0 = field.time
    for m in range(1, steps + 1):
        field = step(field, dt, s) if target_norm is None else step_normalized(field, dt, s, target_norm)
        field = replace(field, time=t0 + m * dt)
        yield field


def rmse(numerical: WaveField, reference: WaveField) -> float:
    """Root mean square of the difference of moduli."""
    if numerical.grid != reference.grid:
        raise UsageError("RMSE between fields on different grids")
    diff = np.abs(numerical.psi) - np.abs(reference.psi)
    return float(np.sqrt(np.mean(diff * diff)))
