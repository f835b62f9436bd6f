import os
import subprocess
import sys

import numpy as np
import pytest

from dirkdg import kernels
from dirkdg.basis import Grid1D, project
from dirkdg.jfnk import SolverConfig, jfnk_solve
from dirkdg.operator import stage_residual
from dirkdg.problems import make_problem

needs_compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS,
                                    reason="compiled kernels not built")


def test_env_var_forces_python_fallback():
    env = dict(os.environ, DIRKDG_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import dirkdg; print(dirkdg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_residual("fortran")


@needs_compiled
def test_compiled_is_default():
    assert kernels.BACKEND == "compiled"


@needs_compiled
def test_invalid_state_counts_agree():
    spec = make_problem("euler-expansion-a")
    u = project(spec.initial, Grid1D(20, *spec.domain), 1).moments
    u[7, 1, 2] = -50.0  # negative energy at one trace and quadrature nodes
    counts = []
    for name in ("compiled", "python"):
        out = np.empty_like(u)
        counts.append(kernels.get_residual(name)(u, spec.model.code, spec.model.kernel_params(),
                                                 False, out))
    assert counts[0] == counts[1] > 0


@needs_compiled
def test_gmres_backends_agree(rng):
    A = np.eye(30) + 0.3 * rng.normal(size=(30, 30))
    b = rng.normal(size=30)
    res = [kernels.get_gmres(n)(lambda v: A @ v, b, 1e-10, 30) for n in ("compiled", "python")]
    np.testing.assert_allclose(res[0][0], res[1][0], atol=1e-10)
    assert res[0][1] == res[1][1]


@needs_compiled
def test_full_solve_backends_agree():
    spec = make_problem("burgers-smooth")
    u0 = project(spec.initial, Grid1D(24, *spec.domain), 2).moments
    outs = []
    for name in ("compiled", "python"):
        def G(U, name=name):
            U3 = U.reshape(u0.shape)
            return U + 0.05 * stage_residual(U3, spec, backend=name).ravel() - u0.ravel()
        outs.append(jfnk_solve(G, u0.ravel(), SolverConfig(1e-12, 20, 1e-12, 100))[0])
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-11)
