"""Compiled vs pure-numpy kernels on the hot paths of a VQA step.

    python benchmarks/bench_kernels.py [--n 6] [--d 12] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from nlsevqa import kernels
from nlsevqa.circuits import AnsatzParams, build_tilde_u, parameter_count
from nlsevqa.statevector import zero_state


def cases(n, d, rng):
    lam = rng.uniform(-np.pi, np.pi, parameter_count(n, d))
    target = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    ops = build_tilde_u(AnsatzParams(lam, n, d), 3e-3).compiled
    psi = zero_state(n).amplitudes
    return {
        "ansatz_state": lambda b: b.ansatz_state(lam, n, d, 1.0),
        "cost+grad (fd)": lambda b: b.ansatz_overlap_grad(lam, n, d, target, 1e-7, False),
        "cost+grad (exact)": lambda b: b.ansatz_overlap_grad(lam, n, d, target, 1e-7, True),
        "Utilde circuit": lambda b: b.apply_ops(psi.copy(), *ops),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--d", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    backends = {"python": kernels.get_backend("python")}
    try:
        backends["compiled"] = kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"n={args.n} d={args.d} ({parameter_count(args.n, args.d)} parameters), best of {args.repeat}")
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, fn in cases(args.n, args.d, rng).items():
        times = {}
        for name, b in backends.items():
            fn(b)
            times[name] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        row = f"{label:<20}" + "".join(f"{1e3 * t:>12.3f}ms" for t in times.values())
        if len(times) == 2:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
