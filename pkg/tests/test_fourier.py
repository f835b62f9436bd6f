import cmath

import numpy as np
import pytest

from dirkdg.basis import Grid1D, project
from dirkdg.fourier import (DefectiveMatrixError, SingularStageError, analyze, build_M,
                            build_symbol, courant_timestep, dirk_stability_function,
                            projection_coefficients, semidiscrete_eigs, small_eig,
                            stability_scan, sweep_measures, upwind_weights)
from dirkdg.tableaux import GAMMA_LSTABLE_2, make_dirk22, make_dirk33, make_dirk43, make_explicit


def _direct_step_matrix(A, tab, dt):
    """One DIRK step on du/dt = A u assembled from the stage equations as one block system."""
    n, s = A.shape[0], tab.stages
    big = np.eye(n * s, dtype=complex)
    for i in range(s):
        for j in range(s):
            big[i * n:(i + 1) * n, j * n:(j + 1) * n] -= dt * tab.a[i, j] * A
    rhs = np.tile(np.eye(n), (s, 1))
    U = np.linalg.solve(big, rhs)  # stacked stage values as maps of u^n
    M = np.eye(n, dtype=complex)
    for i in range(s):
        M += dt * tab.b[i] * A @ U[i * n:(i + 1) * n]
    return M


def test_upwind_weights():
    assert upwind_weights(1.0, 1.0) == (1.0, 0.0)
    assert upwind_weights(-2.0, 1.0) == (0.0, 1.0)
    assert upwind_weights(1.0, 0.0) == (0.5, 0.5)
    with pytest.raises(ValueError):
        upwind_weights(0.0, 1.0)


def test_symbol_validation():
    with pytest.raises(ValueError):
        build_symbol(3, 1.0)
    with pytest.raises(ValueError):
        build_symbol(1, 0.0)


@pytest.mark.parametrize("p", [1, 2])
def test_symbol_consistency_at_small_K(p):
    """The principal eigenvalue approaches -i a k."""
    h = 0.01
    for K in (1e-2, 2e-2):
        lam = semidiscrete_eigs(build_symbol(p, K, 1.0, h))[0]
        assert abs(lam + 1j * K / h) < 1e-4 * K / h


@pytest.mark.parametrize("p", [1, 2])
def test_symbol_dissipative_for_upwind(p):
    for K in np.linspace(0.1, np.pi, 7):
        assert np.all(semidiscrete_eigs(build_symbol(p, K)).real <= 1e-12)


def test_central_flux_is_skew():
    for K in (0.4, 2.0):
        assert np.all(np.abs(semidiscrete_eigs(build_symbol(1, K, beta=0.0)).real) < 1e-12)


@pytest.mark.parametrize("tab", [make_dirk22(0.25), make_dirk22(GAMMA_LSTABLE_2),
                                 make_dirk33(0.435866521508459), make_dirk43()],
                         ids=lambda t: t.name)
@pytest.mark.parametrize("p, K", [(1, 0.7), (2, 2.1)])
def test_build_M_matches_block_solve(tab, p, K):
    A = build_symbol(p, K, 1.0, 0.1).A
    dt = courant_timestep(p, 0.1, 5.0)
    np.testing.assert_allclose(build_M(A, tab, dt), _direct_step_matrix(A, tab, dt), atol=1e-12)


@pytest.mark.parametrize("z", [-3.0, 0.5 + 2j, -0.1 - 7j])
def test_scalar_M_is_stability_function(z):
    for tab in (make_dirk22(0.25), make_dirk43()):
        M = build_M(np.array([[z]]), tab, 1.0)
        assert M[0, 0] == pytest.approx(dirk_stability_function(tab, z), abs=1e-12)


def test_stability_function_of_backward_euler_like_dirk22():
    g = 0.25
    tab = make_dirk22(g)
    z = -2.0 + 0.5j
    # two-stage DIRK closed form: (1 + z(1 - 2g) + z^2 (g^2 - 2g + 1/2)) / (1 - g z)^2
    expect = (1 + z * (1 - 2 * g) + z * z * (g * g - 2 * g + 0.5)) / (1 - g * z) ** 2
    assert dirk_stability_function(tab, z) == pytest.approx(expect)
    assert dirk_stability_function(make_explicit(2), z) == pytest.approx(1 + z + z * z / 2)


def test_singular_stage_detected():
    with pytest.raises(SingularStageError):
        build_M(np.array([[4.0]]), make_dirk22(0.25), 1.0)


def test_small_eig_against_numpy(rng):
    for n in (2, 3):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        lams, vecs = small_eig(M)
        ref = np.linalg.eigvals(M)
        assert np.allclose(np.sort_complex(lams), np.sort_complex(ref), atol=1e-12)
        np.testing.assert_allclose(M @ vecs, vecs * lams, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(vecs, axis=0), 1.0)


def test_small_eig_rejects_defective_and_bad_shapes():
    with pytest.raises(DefectiveMatrixError):
        small_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        small_eig(np.eye(4))


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("K", [0.2, 1.3, np.pi])
def test_projection_coefficients_match_quadrature(p, K):
    """Moments of the Fourier mode on a cell centred at 0 with h = 1."""
    grid = Grid1D(1, -0.5, 0.5)
    re = project(lambda x: np.cos(K * x), grid, p).moments[0, :, 0]
    im = project(lambda x: np.sin(K * x), grid, p).moments[0, :, 0]
    np.testing.assert_allclose(projection_coefficients(p, K), re + 1j * im, atol=1e-12)


def test_analyze_energies_and_ordering():
    h, K = 1.0, 0.5
    dt = courant_timestep(1, h, 1.0)
    res = analyze(1, K, 1.0, h, dt, make_dirk22(0.25))
    assert res.energies.sum() == pytest.approx(1.0)
    assert res.energies[0] > 0.99
    np.testing.assert_allclose(res.eigenvectors @ res.weights, res.mu, atol=1e-12)
    exact = cmath.exp(-1j * K * dt / h)
    dist = np.abs(res.eigenvalues - exact)
    assert dist[0] == dist.min()


def test_analyze_principal_frequency_consistent():
    tab = make_dirk22(GAMMA_LSTABLE_2)
    h, K = 1.0, 0.05
    res = analyze(1, K, 1.0, h, courant_timestep(1, h, 1.0), tab)
    assert res.omega[0].real == pytest.approx(K, rel=1e-3)
    assert abs(res.omega[0].imag) < 1e-5


def test_a_stable_scheme_is_never_amplifying():
    rows = sweep_measures(2, make_dirk43(), 1.0, 15.0, np.linspace(0.05, np.pi, 30))
    assert all(row["m_diss"] <= 1e-12 for row in rows)
    assert set(rows[0]) >= {"K", "m_disp", "m_diss", "beta_0", "re_omega_2"}


def test_stability_scan_verdicts():
    assert stability_scan(make_dirk22(0.25), samples=120).a_stable
    assert not stability_scan(make_dirk22(0.2), samples=120).a_stable
    assert not stability_scan(make_explicit(2), samples=120).a_stable
    scan = stability_scan(make_dirk22(GAMMA_LSTABLE_2), samples=50)
    assert scan.region.shape == (50, 50)
    assert scan.r_infinity < 1e-6
