import numpy as np
import pytest

from dirkdg.basis import Grid1D, project
from dirkdg.fourier import build_symbol, projection_coefficients
from dirkdg.kernels import BACKENDS
from dirkdg.operator import semidiscrete_rhs, stage_residual, volume_term
from dirkdg.problems import InvalidStateError, make_problem, primitive_to_conserved

ADV = make_problem("advect-sin-warp")


def test_volume_term_linear_flux(rng):
    u = rng.normal(size=(5, 3, 1))
    for j in range(5):
        assert volume_term(u, ADV, j, 0) == pytest.approx([0.0])
        assert volume_term(u, ADV, j, 1) == pytest.approx(2 * u[j, 0], abs=1e-14)
        assert volume_term(u, ADV, j, 2) == pytest.approx(2 * u[j, 1], abs=1e-14)
    with pytest.raises(ValueError):
        volume_term(u, ADV, 0, 3)


def test_volume_term_burgers_quadrature_exact_for_p1():
    spec = make_problem("burgers-smooth")
    u = np.array([[[0.3], [0.7]]])
    # f = (a + b y)^2 / 4, Q_1 = int f dy = (2a^2 + 2b^2/3) / 4
    assert volume_term(u, spec, 0, 1)[0] == pytest.approx((2 * 0.09 + 2 * 0.49 / 3) / 4)


@pytest.mark.parametrize("name, const", [("advect-sin-warp", [0.4]), ("burgers-smooth", [1.3]),
                                         ("euler-density-wave",
                                          list(primitive_to_conserved(1.0, 0.5, 1.0)))])
def test_constant_state_has_zero_residual(name, const):
    spec = make_problem(name)
    u = np.zeros((8, 3, len(const)))
    u[:, 0, :] = const
    np.testing.assert_allclose(stage_residual(u, spec, "periodic"), 0.0, atol=1e-13)


@pytest.mark.parametrize("name", ["advect-sin-warp", "burgers-smooth"])
def test_periodic_mean_residual_telescopes(name, rng):
    spec = make_problem(name)
    u = rng.normal(size=(16, 3, 1))
    K = stage_residual(u, spec)
    assert abs(K[:, 0, :].sum()) < 1e-12


def test_linear_residual_is_linear(rng):
    u, v = rng.normal(size=(2, 10, 3, 1))
    lhs = stage_residual(2.5 * u - v, ADV)
    np.testing.assert_allclose(lhs, 2.5 * stage_residual(u, ADV) - stage_residual(v, ADV),
                               atol=1e-12)


@pytest.mark.parametrize("name", ["advect-sin-warp", "burgers-smooth", "euler-density-wave"])
def test_residual_is_local(name, rng):
    spec = make_problem(name)
    N = 12
    base = project(spec.initial, Grid1D(N, *spec.domain), 1).moments
    pert = base.copy()
    pert[5, 1, :] += 1e-3 * rng.uniform(0.5, 1.0, size=base.shape[2])
    diff = np.abs(stage_residual(pert, spec) - stage_residual(base, spec)).max(axis=(1, 2))
    assert np.all(diff[[0, 1, 2, 3, 7, 8, 9, 10, 11]] == 0.0)
    assert diff[5] > 0


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("K", [2 * np.pi / 24, 14 * np.pi / 24, np.pi])
def test_rhs_matches_fourier_symbol(p, K):
    """The semi-discrete operator acting on a periodic discrete Fourier mode is its symbol."""
    N, h = 24, 0.5
    c = projection_coefficients(p, K)
    phase = np.exp(1j * K * np.arange(N))
    mode = c[None, :] * phase[:, None]
    A = build_symbol(p, K, 1.0, h).A
    expect = (A @ c)[None, :] * phase[:, None]
    for part in (np.real, np.imag):
        rhs = semidiscrete_rhs(part(mode)[:, :, None], ADV, h)
        np.testing.assert_allclose(rhs[:, :, 0], part(expect), atol=1e-12)


def test_euler_residual_rejects_negative_pressure():
    spec = make_problem("euler-expansion-a")
    u = np.zeros((6, 2, 3))
    u[:, 0, :] = [1.0, 0.0, -1.0]
    with pytest.raises(InvalidStateError):
        stage_residual(u, spec)


def test_component_mismatch():
    with pytest.raises(ValueError):
        stage_residual(np.zeros((4, 2, 3)), ADV)


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernels not built")
@pytest.mark.parametrize("name, bc", [("advect-sin-warp", "periodic"), ("burgers-smooth", "periodic"),
                                      ("euler-expansion-a", "transmissive"),
                                      ("euler-colliding-b", "periodic")])
def test_backends_agree(name, bc):
    spec = make_problem(name)
    for p in (1, 2):
        u = project(spec.initial, Grid1D(30, *spec.domain), p).moments
        u[:, 1:, :] *= 1.3
        a = stage_residual(u, spec, bc, backend="compiled")
        b = stage_residual(u, spec, bc, backend="python")
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
