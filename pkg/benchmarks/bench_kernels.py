"""Compiled versus pure-Python kernels: stage residual, GMRES core and one DIRK-DG step.

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import time

import numpy as np

from dirkdg import kernels
from dirkdg.basis import Grid1D, project
from dirkdg.jfnk import gmres
from dirkdg.operator import stage_residual
from dirkdg.problems import make_problem


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def residual_case(name, N, p):
    spec = make_problem(name)
    u = project(spec.initial, Grid1D(N, *spec.domain), p).moments
    return lambda backend: (lambda: stage_residual(u, spec, backend=backend))


def gmres_case(n):
    rng = np.random.default_rng(1)
    A = np.eye(n) + rng.normal(size=(n, n)) / np.sqrt(n)
    b = rng.normal(size=n)
    return lambda backend: (lambda: gmres(lambda v: A @ v, b, 1e-10, 200, backend=backend))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; only the Python backend is available")
    cases = {
        "residual advection N=400 p=1": residual_case("advect-sin-warp", 400, 1),
        "residual burgers N=400 p=2": residual_case("burgers-smooth", 400, 2),
        "residual euler N=1000 p=1": residual_case("euler-colliding-b", 1000, 1),
        "gmres n=600": gmres_case(600),
    }
    print(f"{'case':32s}" + "".join(f"{b:>14s}" for b in kernels.BACKENDS) + "   speedup")
    for label, make in cases.items():
        t = {b: best_of(make(b), args.repeat) for b in kernels.BACKENDS}
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{label:32s}" + "".join(f"{v * 1e3:12.3f}ms" for v in t.values())
              + f"   {speed:6.1f}x")


if __name__ == "__main__":
    main()
