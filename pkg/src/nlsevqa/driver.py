"""Time stepping, classical baselines, parameter sweeps and result files."""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .circuits import AnsatzParams, DEFAULT_BOUNDS, build_tilde_u, parameter_count
from .classical import (
    Grid,
    SolitonSpec,
    WaveField,
    analytic_solution,
    evolve,
    implicit_substep,
    initial_condition,
    rmse,
)
from .cost import CostContext, cost_prefactor
from .optimizer import OptimizerConfig, SeedMode, central_difference, minimize, seed_parameters
from .statevector import ConfigurationError, run

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NLSEVQA_OUTPUT_DIR"
CSV_HEADER = ("step", "t", "rmse_q", "rmse_c", "rmse_nc", "cost", "iters")


class Mode(enum.Enum):
    VQA = "VQA"
    CLASSICAL = "CLASSICAL"
    CLASSICAL_NORMALIZED = "CLASSICAL_NORMALIZED"


@dataclass(frozen=True)
class RunConfig:
    n: int = 6
    d: int = 12
    dt: float = 3e-3
    num_steps: int = 100
    s: float = 1.0
    a: float = 2.0
    v: float = 10.0
    x0: float = -1.0
    seed: int = 0
    ftol: float = 1e-14
    bounds: tuple[float, float] = DEFAULT_BOUNDS
    mode: Mode = Mode.VQA
    output_times: tuple[int, ...] | None = None
    # gradient source: "fd" (central differences), "exact" (analytic) or "naive-fd"
    gradient: str = "fd"
    tilde_via_circuit: bool = False
    max_iters: int = 15000

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if self.output_times is not None:
            object.__setattr__(self, "output_times", tuple(int(m) for m in self.output_times))
        if self.n < 2 or self.d < 0 or not self.dt > 0 or self.num_steps < 1:
            raise ConfigurationError("need n >= 2, d >= 0, dt > 0, num_steps >= 1")
        if self.gradient not in ("fd", "exact", "naive-fd"):
            raise ConfigurationError(f"unknown gradient source {self.gradient!r}")
        if self.tilde_via_circuit and self.n > 6:
            raise ConfigurationError("circuit realization of the linear step is limited to n <= 6")
        if not self.bounds[0] < self.bounds[1]:
            raise ConfigurationError(f"empty bounds {self.bounds}")
        if self.a <= 0:
            raise ConfigurationError("soliton amplitude must be positive")

    @property
    def soliton(self) -> SolitonSpec:
        return SolitonSpec(self.a, self.v, self.x0, self.s)

    @property
    def snapshot_steps(self) -> tuple[int, ...]:
        if self.output_times is not None:
            return self.output_times
        return tuple(sorted({round(i * self.num_steps / 5) for i in range(6)}))

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["mode"] = self.mode.value
        out["bounds"] = list(self.bounds)
        out["output_times"] = None if self.output_times is None else list(self.output_times)
        return out

    @classmethod
    def from_json(cls, data: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        try:
            return cls.from_json(data)
        except TypeError as exc:
            raise ConfigurationError(f"bad config {path}: {exc}") from exc


@dataclass
class RunRecord:
    config: dict
    grid_x: list[float]
    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    rmse_q: list[float | None] = field(default_factory=list)
    rmse_c: list[float | None] = field(default_factory=list)
    rmse_nc: list[float | None] = field(default_factory=list)
    cost: list[float | None] = field(default_factory=list)
    iters: list[int] = field(default_factory=list)
    termination: list[str | None] = field(default_factory=list)
    flagged: list[bool] = field(default_factory=list)
    norm: list[float] = field(default_factory=list)
    lambdas: list[list[float]] = field(default_factory=list)
    snapshots: dict[int, list[float]] = field(default_factory=dict)

    def rows(self):
        for i in range(len(self.steps)):
            yield (self.steps[i], self.times[i], self.rmse_q[i], self.rmse_c[i], self.rmse_nc[i],
                   self.cost[i], self.iters[i])

    def final(self, column: str) -> float | None:
        return getattr(self, column)[-1]


class Reconstruction:
    """Maps unit statevectors to physical fields normalized to 2a and back."""

    def __init__(self, a: float, grid: Grid):
        self.grid = grid
        self.amplitude_scale = math.sqrt(2 * a / grid.dx)

    def to_field(self, psi, t: float = 0.0) -> WaveField:
        return WaveField(self.amplitude_scale * np.asarray(psi), self.grid, t)

    def to_state(self, fld: WaveField) -> np.ndarray:
        return fld.psi / self.amplitude_scale


def _errors(fld: WaveField, spec: SolitonSpec) -> float | None:
    if spec.s != 1:
        return None
    return rmse(fld, analytic_solution(spec, fld.grid, fld.time))


def _gradient_hook(cfg: RunConfig, ctx: CostContext, fd_step: float):
    if cfg.gradient == "fd":
        return lambda x: ctx.value_and_grad(x, fd_step, False)
    if cfg.gradient == "exact":
        return lambda x: ctx.value_and_grad(x, exact=True)
    lo, hi = cfg.bounds
    return lambda x: (ctx.value(x), central_difference(ctx.value, x, fd_step, lo, hi))


def _classical_tracks(cfg: RunConfig, grid: Grid):
    spec = cfg.soliton
    f0 = initial_condition(spec, grid)
    c = [f0] + list(evolve(f0, cfg.dt, cfg.s, cfg.num_steps))
    nc = [f0] + list(evolve(f0, cfg.dt, cfg.s, cfg.num_steps, target_norm=2 * cfg.a))
    return c, nc


def _new_record(cfg: RunConfig, grid: Grid) -> RunRecord:
    return RunRecord(config=cfg.to_json(), grid_x=[float(x) for x in grid.x])


def run_vqa(cfg: RunConfig) -> RunRecord:
    if cfg.mode is not Mode.VQA:
        raise ConfigurationError("run_vqa needs mode VQA")
    grid = Grid.for_qubits(cfg.n)
    spec = cfg.soliton
    recon = Reconstruction(cfg.a, grid)
    opt = OptimizerConfig(ftol=cfg.ftol, bounds=cfg.bounds, max_iters=cfg.max_iters)
    prefactor = cost_prefactor(cfg.s, cfg.dt, cfg.a, grid.dx)
    c_track, nc_track = _classical_tracks(cfg, grid)
    snaps = set(cfg.snapshot_steps)
    rec = _new_record(cfg, grid)

    psi0 = c_track[0].psi / np.linalg.norm(c_track[0].psi)
    fld = recon.to_field(psi0, 0.0)

    def record(m, fld, cost, res):
        rec.steps.append(m)
        rec.times.append(m * cfg.dt)
        rec.rmse_q.append(_errors(fld, spec))
        rec.rmse_c.append(_errors(c_track[m], spec))
        rec.rmse_nc.append(_errors(nc_track[m], spec))
        rec.cost.append(cost)
        rec.iters.append(0 if res is None else res.iterations)
        rec.termination.append(None if res is None else res.termination.value)
        rec.flagged.append(False if res is None else res.flagged)
        rec.norm.append(fld.norm2())
        rec.lambdas.append([] if res is None else [float(x) for x in res.lambda_star])
        if m in snaps:
            rec.snapshots[m] = [float(x) for x in np.abs(fld.psi)]

    record(0, fld, None, None)
    rng = np.random.default_rng(cfg.seed)
    lam = None
    psi = psi0
    for m in range(1, cfg.num_steps + 1):
        if m == 1 or not cfg.tilde_via_circuit:
            w = implicit_substep(WaveField(psi, grid), cfg.dt).psi
        else:
            w = run(build_tilde_u(AnsatzParams(lam, cfg.n, cfg.d, cfg.bounds), cfg.dt)).amplitudes
        ctx = CostContext(w / np.linalg.norm(w), prefactor, cfg.n, cfg.d)
        if lam is None:
            x0 = seed_parameters(cfg.n, cfg.d, SeedMode.RANDOM, rng_seed=rng, bounds=cfg.bounds)
        else:
            x0 = seed_parameters(cfg.n, cfg.d, SeedMode.WARM, prev=lam)
        res = minimize(ctx.value, x0, opt, value_and_grad=_gradient_hook(cfg, ctx, opt.fd_step))
        if res.flagged or not res.converged:
            log.info("step %d: optimizer ended with %s", m, res.termination.value)
        lam = res.lambda_star
        psi = kernels.ansatz_state(lam, cfg.n, cfg.d)
        fld = recon.to_field(psi, m * cfg.dt)
        record(m, fld, res.cost_star, res)
        log.debug("step %d cost %.12f iters %d rmse_q %s", m, res.cost_star, res.iterations, rec.rmse_q[-1])
    return rec


def run_classical(cfg: RunConfig) -> RunRecord:
    if cfg.mode is Mode.VQA:
        raise ConfigurationError("run_classical needs a classical mode")
    grid = Grid.for_qubits(cfg.n)
    spec = cfg.soliton
    c_track, nc_track = _classical_tracks(cfg, grid)
    own = c_track if cfg.mode is Mode.CLASSICAL else nc_track
    snaps = set(cfg.snapshot_steps)
    rec = _new_record(cfg, grid)
    for m in range(cfg.num_steps + 1):
        rec.steps.append(m)
        rec.times.append(m * cfg.dt)
        rec.rmse_q.append(None)
        rec.rmse_c.append(_errors(c_track[m], spec))
        rec.rmse_nc.append(_errors(nc_track[m], spec))
        rec.cost.append(None)
        rec.iters.append(0)
        rec.termination.append(None)
        rec.flagged.append(False)
        rec.norm.append(own[m].norm2())
        rec.lambdas.append([])
        if m in snaps:
            rec.snapshots[m] = [float(x) for x in np.abs(own[m].psi)]
    return rec


def run_config(cfg: RunConfig) -> RunRecord:
    return run_vqa(cfg) if cfg.mode is Mode.VQA else run_classical(cfg)


def sweep_timesteps(base: RunConfig, step_counts, t_final: float = 0.3) -> list[dict]:
    """Final-time RMSE of Q, C and NC for each number of steps spanning ``t_final``."""
    table = []
    for count in step_counts:
        cfg = base.replace(mode=Mode.VQA, num_steps=int(count), dt=t_final / count,
                           output_times=(0, int(count)))
        rec = run_vqa(cfg)
        table.append({"steps": int(count), "dt": cfg.dt, "rmse_q": rec.final("rmse_q"),
                      "rmse_c": rec.final("rmse_c"), "rmse_nc": rec.final("rmse_nc"),
                      "iters": int(sum(rec.iters))})
        log.info("sweep steps=%d rmse_q=%s", count, rec.final("rmse_q"))
    return table


def sweep_depth(base: RunConfig, depths, dt: float = 1e-3, x0: float = 0.0,
                ftol: float = 1e-13) -> dict[int, RunRecord]:
    """One VQA run per depth with the depth-study settings."""
    out = {}
    for d in depths:
        cfg = base.replace(mode=Mode.VQA, d=int(d), dt=dt, x0=x0, ftol=ftol)
        out[int(d)] = run_vqa(cfg)
        log.info("sweep depth=%d (%d parameters) final rmse_q=%s", d, parameter_count(cfg.n, d),
                 out[int(d)].final("rmse_q"))
    return out


def depth_table(records: dict[int, RunRecord]) -> list[dict]:
    rows = []
    for d, rec in records.items():
        for step, t, q, c in zip(rec.steps, rec.times, rec.rmse_q, rec.rmse_c):
            rows.append({"depth": d, "step": step, "t": t, "rmse_q": q, "rmse_c": c})
    return rows


# --- result files -----------------------------------------------------------

def output_dir(default=".") -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, default))


def _cell(v):
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def write_csv(record: RunRecord, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in record.rows():
                w.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def write_json(record: RunRecord, path) -> Path:
    path = Path(path)
    data = dataclasses.asdict(record)
    data["snapshots"] = {str(k): v for k, v in record.snapshots.items()}
    try:
        with path.open("w") as fh:
            json.dump(data, fh)
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def load_record(path) -> RunRecord:
    with open(path) as fh:
        data = json.load(fh)
    data["snapshots"] = {int(k): v for k, v in data["snapshots"].items()}
    return RunRecord(**data)


def emit_results(record: RunRecord, fmt: str, path) -> list[Path]:
    """Write ``record`` as "csv", "json" or "both" (path suffix is replaced)."""
    path = Path(path)
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    written = []
    if fmt in ("csv", "both"):
        written.append(write_csv(record, path.with_suffix(".csv")))
    if fmt in ("json", "both"):
        written.append(write_json(record, path.with_suffix(".json")))
    return written


def write_table(rows: list[dict], path) -> Path:
    path = Path(path)
    if not rows:
        raise ValueError("empty table")
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in row.items()})
    return path
