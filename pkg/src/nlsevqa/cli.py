"""Command line entry point: ``nlsevqa {solve,sweep-steps,sweep-depth,verify-circuits}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .circuits import AnsatzParams, build_qft, build_tilde_u, build_kinetic_phase, KineticPhaseSpec, parameter_count
from .classical import Grid, WaveField, implicit_substep
from .cost import CostContext, assemble_cost_from_circuits, cost_direct
from .driver import (
    RunConfig,
    depth_table,
    emit_results,
    output_dir,
    run_config,
    sweep_depth,
    sweep_timesteps,
    write_table,
)
from .statevector import ConfigurationError, run

log = logging.getLogger("nlsevqa")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc


def _cmd_solve(args) -> int:
    cfg = RunConfig.load(args.config)
    rec = run_config(cfg)
    out = output_dir(args.out_dir) / (args.name or Path(args.config).stem)
    for path in emit_results(rec, "both", out):
        print(path)
    return 0


def _cmd_sweep_steps(args) -> int:
    cfg = RunConfig.load(args.config)
    table = sweep_timesteps(cfg, args.counts, args.t_final)
    out = output_dir(args.out_dir) / f"{args.name or Path(args.config).stem}_steps"
    print(write_table(table, out.with_suffix(".csv")))
    out.with_suffix(".json").write_text(json.dumps({"config": cfg.to_json(), "table": table}))
    print(out.with_suffix(".json"))
    return 0


def _cmd_sweep_depth(args) -> int:
    cfg = RunConfig.load(args.config)
    records = sweep_depth(cfg, args.depths)
    base = output_dir(args.out_dir) / f"{args.name or Path(args.config).stem}_depth"
    print(write_table(depth_table(records), base.with_suffix(".csv")))
    for d, rec in records.items():
        for path in emit_results(rec, "json", base.with_name(f"{base.name}_d{d}")):
            print(path)
    return 0


def verify_circuits(n: int, instances: int = 10, seed: int = 0, d: int = 2) -> list[tuple[str, float, float]]:
    """Oracle checks of the quantum constructions; rows of (check, error, tolerance)."""
    rng = np.random.default_rng(seed)
    M = 2 ** n
    rows = []
    j = np.arange(M)
    dft = np.exp(2j * np.pi * np.outer(j, j) / M) / np.sqrt(M)
    rows.append(("qft_vs_dft", float(np.abs(build_qft(n).unitary() - dft).max()), 1e-12))

    gamma = -1.5e-3
    diag = np.diag(build_kinetic_phase(KineticPhaseSpec(n, gamma)).unitary())
    expected = np.exp(1j * gamma * ((j - M / 2) ** 2 - M * M / 4))
    rows.append(("kinetic_phase_diagonal", float(np.abs(diag - expected).max()), 1e-12))

    grid = Grid(M)
    worst = 0.0
    for _ in range(instances):
        lam = AnsatzParams(rng.uniform(-np.pi, np.pi, parameter_count(n, d)), n, d)
        circ = run(build_tilde_u(lam, 3e-3)).amplitudes
        ref = implicit_substep(WaveField(kernels.ansatz_state(lam.lam, n, d), grid), 3e-3).psi
        k = np.argmax(np.abs(ref))
        phase = circ[k] / ref[k]
        worst = max(worst, float(np.abs(circ - phase / abs(phase) * ref).max()))
    rows.append(("tilde_u_vs_fft", worst, 1e-10))

    if 3 * n + 1 <= 19:
        worst = 0.0
        for _ in range(instances):
            lt = AnsatzParams(rng.uniform(-np.pi, np.pi, parameter_count(n, d)), n, d)
            tr = AnsatzParams(rng.uniform(-np.pi, np.pi, parameter_count(n, d)), n, d)
            ctx = CostContext.from_circuit(lt, 3e-3, float(rng.uniform(0.5, 50)))
            worst = max(worst, abs(assemble_cost_from_circuits(ctx, lt, tr, 3e-3) - cost_direct(ctx, tr)))
        rows.append(("cost_circuits_vs_direct", worst, 1e-9))
    return rows


def _cmd_verify(args) -> int:
    ok = True
    for name, err, tol in verify_circuits(args.n, args.instances, args.seed):
        passed = err < tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: max error {err:.3e} (tol {tol:.0e})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlsevqa", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def with_outputs(sp):
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out-dir", default=".", help="output directory (overridden by NLSEVQA_OUTPUT_DIR)")
        sp.add_argument("--name", help="output file stem (default: config file stem)")

    sp = sub.add_parser("solve", help="single run in any mode")
    with_outputs(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("sweep-steps", help="final-time RMSE versus number of steps")
    with_outputs(sp)
    sp.add_argument("--counts", type=_int_list, default=[20, 40, 60, 80, 100, 150])
    sp.add_argument("--t-final", type=float, default=0.3)
    sp.set_defaults(func=_cmd_sweep_steps)

    sp = sub.add_parser("sweep-depth", help="RMSE time series versus circuit depth")
    with_outputs(sp)
    sp.add_argument("--depths", type=_int_list, default=[8, 9, 10, 11, 12, 13])
    sp.set_defaults(func=_cmd_sweep_depth)

    sp = sub.add_parser("verify-circuits", help="QFT, kinetic phase, Utilde and cost oracle checks")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--instances", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "out_dir", None) is not None:
            output_dir(args.out_dir).mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
