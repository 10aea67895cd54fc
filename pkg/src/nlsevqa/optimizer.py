"""Box-constrained limited-memory BFGS.

Search directions come from the two-loop recursion restricted to the free
variables (those not pinned at a bound by the gradient); steps are projected
onto the box and accepted by backtracking on the Armijo condition measured
along the projected path.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .circuits import DEFAULT_BOUNDS, parameter_count
from .statevector import UsageError

log = logging.getLogger(__name__)


class Termination(enum.Enum):
    FTOL = "ftol"
    GTOL = "gtol"
    MAX_ITERS = "max_iters"
    LINE_SEARCH = "line_search"
    NONFINITE = "nonfinite"


@dataclass(frozen=True)
class OptimizerConfig:
    memory: int = 10
    ftol: float = 1e-14
    gtol: float = 1e-5
    max_iters: int = 15000
    fd_step: float = 1e-7
    bounds: tuple[float, float] = DEFAULT_BOUNDS
    armijo: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        if self.memory < 1 or self.max_iters < 1:
            raise UsageError("memory and max_iters must be positive")
        if not (self.ftol > 0 and self.gtol > 0 and self.fd_step > 0):
            raise UsageError("ftol, gtol and fd_step must be positive")
        if not self.bounds[0] < self.bounds[1]:
            raise UsageError(f"empty bounds {self.bounds}")


@dataclass
class OptimizationResult:
    lambda_star: np.ndarray
    cost_star: float
    iterations: int
    termination: Termination
    cost_evals: int
    grad_evals: int = 0
    flagged: bool = False

    @property
    def converged(self) -> bool:
        return self.termination in (Termination.FTOL, Termination.GTOL)


def central_difference(f, x, h, lower, upper):
    """Central differences, shrunk to one side where a probe would leave the box."""
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[i] = min(x[i] + h, upper)
        xm[i] = max(x[i] - h, lower)
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def _two_loop(g, pairs, gamma):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        q -= a * y
        alphas.append(a)
    q *= gamma
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return q


def _interpolate(alpha, f0, slope, fa, lo, hi):
    """Minimizer of the parabola with value f0 and slope at 0 and value fa at alpha, clipped."""
    curv = fa - f0 - slope * alpha
    if curv <= 0:
        return hi
    return min(max(-slope * alpha * alpha / (2 * curv), lo), hi)


def minimize(fun, x0, config: OptimizerConfig = OptimizerConfig(), grad=None,
             value_and_grad=None, callback=None) -> OptimizationResult:
    """Minimize ``fun`` over the box ``config.bounds``.

    ``grad(x)`` or ``value_and_grad(x) -> (f, g)`` supply gradients; without
    either, central differences of step ``config.fd_step`` are used.
    """
    lo, hi = config.bounds
    x = np.array(x0, dtype=np.float64)
    if np.any(x < lo) or np.any(x > hi):
        log.warning("initial point outside bounds, clamping")
        x = np.clip(x, lo, hi)

    evals = 0
    gevals = 0

    def f_only(z):
        nonlocal evals
        evals += 1
        return float(fun(z))

    def f_and_g(z):
        nonlocal evals, gevals
        gevals += 1
        if value_and_grad is not None:
            evals += 1
            val, g = value_and_grad(z)
            return float(val), np.asarray(g, dtype=np.float64)
        val = f_only(z)
        if grad is not None:
            return val, np.asarray(grad(z), dtype=np.float64)
        return val, central_difference(f_only, z, config.fd_step, lo, hi)

    f, g = f_and_g(x)
    if not math.isfinite(f):
        raise ValueError("cost is not finite at the initial point")

    pairs = deque(maxlen=config.memory)
    gamma = 1.0
    it = 0
    term = Termination.MAX_ITERS
    flagged = False
    while it < config.max_iters:
        pg = np.clip(x - g, lo, hi) - x
        if np.max(np.abs(pg)) <= config.gtol:
            term = Termination.GTOL
            break
        # variables held at a bound by the gradient do not move this iteration
        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        gf = np.where(free, g, 0.0)
        if pairs:
            direction = -_two_loop(gf, list(pairs), gamma)
            direction[~free] = 0.0
            if np.dot(direction, gf) >= 0:
                pairs.clear()
        if not pairs:
            direction = -gf / max(1.0, np.linalg.norm(gf))

        alpha = 1.0
        accepted = False
        for _ in range(config.max_backtracks):
            x_new = np.clip(x + alpha * direction, lo, hi)
            step = x_new - x
            decrease = np.dot(g, step)
            if decrease >= 0:
                alpha *= 0.5
                continue
            f_new = f_only(x_new)
            if not math.isfinite(f_new):
                alpha *= 0.5
                flagged = True
                continue
            if f_new <= f + config.armijo * decrease:
                accepted = True
                break
            alpha = _interpolate(alpha, f, decrease / alpha, f_new, 0.1 * alpha, 0.5 * alpha)
        trial = x + alpha * direction
        if accepted and np.all((trial >= lo) & (trial <= hi)):
            # one extra probe at the minimizer of the quadratic through f, f' and f(alpha);
            # exact on quadratics, which restores finite termination there
            alpha_q = _interpolate(alpha, f, decrease / alpha, f_new, 0.0, 10.0 * alpha)
            if 0 < alpha_q and abs(alpha_q - alpha) > 1e-8 * alpha:
                x_q = np.clip(x + alpha_q * direction, lo, hi)
                f_q = f_only(x_q)
                if math.isfinite(f_q) and f_q < f_new:
                    x_new, f_new = x_q, f_q
        if not accepted:
            if pairs:
                # stale curvature model; retry once from steepest descent
                pairs.clear()
                continue
            term = Termination.LINE_SEARCH
            break

        f_new, g_new = f_and_g(x_new)
        if not (math.isfinite(f_new) and np.all(np.isfinite(g_new))):
            term = Termination.NONFINITE
            flagged = True
            break
        it += 1
        s = x_new - x
        y = g_new - g
        sy = np.dot(s, y)
        if sy > 1e-10 * np.dot(y, y):
            if not pairs:
                gamma = sy / np.dot(y, y)
            pairs.append((s, y, 1.0 / sy))
        f_old = f
        x, f, g = x_new, f_new, g_new
        if callback is not None:
            callback(x, f)
        if f_old - f <= config.ftol * max(abs(f_old), abs(f), 1.0):
            term = Termination.FTOL
            break

    if term is Termination.NONFINITE:
        log.warning("non-finite cost encountered; returning best point so far")
    return OptimizationResult(x, f, it, term, evals, gevals, flagged or term is Termination.NONFINITE)


class SeedMode(enum.Enum):
    RANDOM = "random"
    WARM = "warm"


def seed_parameters(n: int, d: int, mode: SeedMode, prev=None, rng_seed=None,
                    bounds=DEFAULT_BOUNDS) -> np.ndarray:
    """Uniform draw inside the box (RANDOM) or the previous optimum verbatim (WARM)."""
    npar = parameter_count(n, d)
    if mode is SeedMode.WARM:
        if prev is None or len(prev) != npar:
            raise UsageError(f"warm start needs a previous vector of length {npar}")
        return np.array(prev, dtype=np.float64)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return rng.uniform(bounds[0], bounds[1], npar)
