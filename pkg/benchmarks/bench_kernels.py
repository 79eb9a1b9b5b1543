"""Compiled vs pure-Python kernels, plus one end-to-end variable-coefficient step.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from vardiss import kernels
from vardiss.dynamics import ModeSolver, ModeState
from vardiss.grid import ZGrid
from vardiss.profiles import build_equilibrium, build_profile


def cases(rng):
    for n in (256, 4096, 65536):
        a, c = rng.normal(size=n), rng.normal(size=n)
        b = 4 + np.abs(a) + np.abs(c)
        d = rng.normal(size=n)
        yield f"cyclic_tridiag_solve n={n}", lambda be, a=a, b=b, c=c, d=d: \
            kernels.cyclic_tridiag_solve(a, b, c, d, backend=be)
    for n in (128, 256, 512):
        s = rng.normal(size=n)
        c1 = rng.normal(size=n) + 1j * rng.normal(size=n)
        c2 = rng.normal(size=n) + 1j * rng.normal(size=n)
        diag = rng.normal(size=n)
        yield f"assemble_fourier_matrix n={n}", lambda be, s=s, c1=c1, c2=c2, diag=diag: \
            kernels.assemble_fourier_matrix(s, c1, c2, diag, backend=be)


def step_case():
    eq = build_equilibrium(build_profile("exponential", {"mu0": 0.01, "eps": 2e-6}, 400.0, 2048))
    g = ZGrid(12.0, 128)
    state = ModeState(1, 0.0, np.exp(-g.z ** 2) + 0j)
    solvers = {be: ModeSolver.from_equilibrium(eq, g, 1, backend=be)
               for be in ("compiled", "python")}
    return "ModeSolver.step n=128 (variable mu)", lambda be: solvers[be].step(state, 0.02)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels._ext is None:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    rows = list(cases(rng)) + [step_case()]
    print(f"{'case':40s} {'compiled [ms]':>14s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, fn in rows:
        times = {}
        for be in ("compiled", "python"):
            if be == "compiled" and kernels._ext is None:
                continue
            number = 3
            times[be] = min(timeit.repeat(lambda: fn(be), number=number, repeat=args.repeat)) / number
        comp = times.get("compiled", float("nan"))
        print(f"{name:40s} {1e3 * comp:14.3f} {1e3 * times['python']:12.3f} "
              f"{times['python'] / comp:8.2f}")


if __name__ == "__main__":
    main()
