"""Von Neumann analysis of DG in space with DIRK in time for linear advection.

A single Fourier mode ``U_j = W e^{i k x_j}`` of the semi-discrete scheme obeys
``W' = A(K) W`` with ``K = k h``; one DIRK step maps ``W`` to ``M W``.  This
module builds ``A`` and ``M``, decomposes ``M`` into eigenmodes and turns the
modal energies of the projected datum into dissipation and dispersion measures.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn

from .basis import LegendreBasis
from .tableaux import ButcherTableau

EIG_RESIDUAL_TOL = 1e-10
CONDITION_LIMIT = 1e10


class DefectiveMatrixError(ArithmeticError):
    """Eigenvalues coalesce or eigenvectors are numerically parallel."""


class SingularStageError(ArithmeticError):
    """A stage matrix ``I - dt a_rr A`` is singular."""


@dataclass(frozen=True)
class SpaceSymbol:
    p: int
    K: float
    a: float
    h: float
    beta: float
    Dm: np.ndarray
    D: np.ndarray
    Dp: np.ndarray
    A: np.ndarray


def upwind_weights(a: float, beta: float) -> tuple[float, float]:
    """Weights ``(b+, b-)`` of the flux ``a (b+ u^- + b- u^+)``."""
    if a == 0.0:
        raise ValueError("advection speed must be nonzero")
    return (a + beta * abs(a)) / (2 * a), (a - beta * abs(a)) / (2 * a)


def build_symbol(p: int, K: float, a: float = 1.0, h: float = 1.0, beta: float = 1.0) -> SpaceSymbol:
    """Matrices ``D-, D, D+`` and ``A = (2a/h)(D- e^{-iK} + D + D+ e^{iK})``."""
    if p not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    if not 0.0 < K <= math.pi:
        raise ValueError("K must lie in (0, pi]")
    bp, bm = upwind_weights(a, beta)
    basis = LegendreBasis(p)
    Z = basis.mass_array()
    Zp = basis.stiffness_array()
    n = p + 1
    sign = (-1.0) ** np.arange(n)
    Dm = np.outer(bp * sign, np.ones(n)) / Z[:, None]
    D = (Zp - bp + bm * np.outer(sign, sign)) / Z[:, None]
    Dp = np.outer(np.ones(n), -bm * sign) / Z[:, None]
    A = (2.0 * a / h) * (Dm * cmath.exp(-1j * K) + D + Dp * cmath.exp(1j * K))
    return SpaceSymbol(p, K, a, h, beta, Dm, D, Dp, A)


# ---------------------------------------------------------------------------
# small complex eigenproblems


def _cbrt(z: complex) -> complex:
    return 0j if z == 0 else cmath.exp(cmath.log(z) / 3.0)


def _char_poly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first."""
    n = M.shape[0]
    tr = np.trace(M)
    if n == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        return np.array([1.0, -tr, det])
    minors = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
              + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
              + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    det = (M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
           - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
           + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))
    return np.array([1.0, -tr, minors, -det])


def _roots_2(c) -> list[complex]:
    _, b, c0 = c
    disc = cmath.sqrt(b * b / 4.0 - c0)
    # the larger root first, the other from the product to avoid cancellation
    r1 = -b / 2.0 + disc if abs(-b / 2.0 + disc) >= abs(-b / 2.0 - disc) else -b / 2.0 - disc
    r2 = c0 / r1 if r1 != 0 else -b - r1
    return [r1, r2]


def _roots_3(c) -> list[complex]:
    """Cardano's formula for a monic complex cubic."""
    _, b, c1, c0 = c
    shift = -b / 3.0
    pp = c1 - b * b / 3.0
    qq = 2.0 * b ** 3 / 27.0 - b * c1 / 3.0 + c0
    disc = cmath.sqrt(qq * qq / 4.0 + pp ** 3 / 27.0)
    u3 = -qq / 2.0 + disc
    if abs(-qq / 2.0 - disc) > abs(u3):
        u3 = -qq / 2.0 - disc
    u = _cbrt(u3)
    w = cmath.exp(2j * math.pi / 3.0)
    roots = []
    for k in range(3):
        uk = u * w ** k
        vk = -pp / (3.0 * uk) if uk != 0 else 0j
        roots.append(uk + vk + shift)
    return roots


def _refine(M: np.ndarray, lam: complex, steps: int = 3) -> complex:
    """Newton on det(M - lam I), the derivative taken as -tr(adj(M - lam I))."""
    n = M.shape[0]
    for _ in range(steps):
        B = M - lam * np.eye(n)
        c = _char_poly(B)
        det = (-1) ** n * c[-1]
        ddet = -((-1) ** (n - 1)) * c[-2]
        if ddet == 0:
            break
        step = det / ddet
        lam = lam - step
        if abs(step) <= 1e-16 * max(1.0, abs(lam)):
            break
    return lam


def _null_vector(B: np.ndarray) -> np.ndarray:
    """A vector annihilated by a rank-deficient 2x2 or 3x3 matrix."""
    if B.shape[0] == 2:
        cands = [np.array([-B[0, 1], B[0, 0]]), np.array([-B[1, 1], B[1, 0]])]
    else:
        cands = [np.cross(B[i], B[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    v = max(cands, key=np.linalg.norm)
    if np.linalg.norm(v) == 0.0:
        # B vanishes: every vector is an eigenvector
        v = np.zeros(B.shape[0], dtype=complex)
        v[0] = 1.0
    return v


def normalize_vector(v: np.ndarray) -> np.ndarray:
    """Unit 2-norm with the first nonzero entry on the positive real axis."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    lead = v[np.flatnonzero(np.abs(v) > 1e-14 * np.max(np.abs(v)))[0]]
    return v * (abs(lead) / lead)


def small_eig(M: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and normalised eigenvectors (columns) of a 2x2 or 3x3 matrix."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.shape not in ((2, 2), (3, 3)):
        raise ValueError("only 2x2 and 3x3 matrices are supported")
    c = _char_poly(M)
    lams = _roots_2(c) if n == 2 else _roots_3(c)
    lams = np.array([_refine(M, lam) for lam in lams])
    vecs = np.column_stack([normalize_vector(_null_vector(M - lam * np.eye(n))) for lam in lams])
    if check:
        scale = max(np.linalg.norm(M, 2), 1e-300)
        gaps = [abs(lams[i] - lams[j]) for i in range(n) for j in range(i + 1, n)]
        if min(gaps) <= 1e-12 * scale:
            raise DefectiveMatrixError(f"eigenvalues coalesce (gap {min(gaps):.2e})")
        if np.linalg.cond(vecs) > CONDITION_LIMIT:
            raise DefectiveMatrixError("eigenvectors are numerically parallel")
    return lams, vecs


def semidiscrete_eigs(symbol: SpaceSymbol) -> np.ndarray:
    """Eigenvalues of ``A``, the one nearest ``-i a k`` first."""
    lams, _ = small_eig(symbol.A)
    target = -1j * symbol.a * symbol.K / symbol.h
    order = np.argsort(np.abs(lams - target), kind="stable")
    return lams[order]


# ---------------------------------------------------------------------------
# fully discrete amplification matrix


def _stage_inverses(A: np.ndarray, tableau: ButcherTableau, dt: float) -> list[np.ndarray]:
    n = A.shape[0]
    inv = []
    for r in range(tableau.stages):
        B = np.eye(n) - dt * tableau.a[r, r] * A
        if np.linalg.cond(B) > 1.0 / np.finfo(float).eps:
            raise SingularStageError(f"stage {r + 1} matrix is singular")
        inv.append(np.linalg.inv(B))
    return inv


def build_M(symbol: SpaceSymbol | np.ndarray, tableau: ButcherTableau, dt: float) -> np.ndarray:
    """One-step propagator written as the nested sums over stage paths."""
    A = symbol.A if isinstance(symbol, SpaceSymbol) else np.asarray(symbol, dtype=complex)
    s = tableau.stages
    if s > 4:
        raise ValueError("at most four stages are supported")
    a, b = tableau.a, tableau.b
    T = [A @ Binv for Binv in _stage_inverses(A, tableau, dt)]  # A B_r^{-1}
    M = np.eye(A.shape[0], dtype=complex)
    for i in range(s):
        M = M + dt * b[i] * T[i]
    for i in range(1, s):
        for j in range(i):
            M = M + dt ** 2 * b[i] * a[i, j] * T[i] @ T[j]
    for i in range(2, s):
        for j in range(1, i):
            for k in range(j):
                M = M + dt ** 3 * b[i] * a[i, j] * a[j, k] * T[i] @ T[j] @ T[k]
    if s == 4:
        M = M + dt ** 4 * b[3] * a[3, 2] * a[2, 1] * a[1, 0] * T[3] @ T[2] @ T[1] @ T[0]
    return M


def projection_coefficients(p: int, K: float) -> np.ndarray:
    """Moments ``c_l`` of ``e^{i K y / 2}`` on the reference cell: ``(2l+1) i^l j_l(K/2)``."""
    l = np.arange(p + 1)
    return (2 * l + 1) * (1j ** l) * spherical_jn(l, K / 2.0)


@dataclass
class AmplificationAnalysis:
    K: float
    M: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mu: np.ndarray
    weights: np.ndarray
    energies: np.ndarray
    omega: np.ndarray
    m_disp: float
    m_diss: float

    @property
    def principal(self) -> complex:
        return complex(self.eigenvalues[0])


def analyze(p: int, K: float, a: float, h: float, dt: float, tableau: ButcherTableau,
            beta: float = 1.0) -> AmplificationAnalysis:
    """Eigenmodes, modal energies, numerical frequencies and the two measures.

    Mode 0 is the eigenvalue closest to the exact multiplier ``e^{-i a K dt/h}``.
    """
    symbol = build_symbol(p, K, a, h, beta)
    M = build_M(symbol, tableau, dt)
    lams, vecs = small_eig(M)
    exact = cmath.exp(-1j * a * K * dt / h)
    principal = int(np.argmin(np.abs(lams - exact)))
    rest = sorted((i for i in range(p + 1) if i != principal), key=lambda i: -abs(lams[i]))
    order = [principal] + rest
    lams, vecs = lams[order], vecs[:, order]

    mu = projection_coefficients(p, K)
    w = np.linalg.solve(vecs, mu)
    energy = np.abs(w) ** 2
    energy = energy / energy.sum()
    omega = (-(h / dt) * np.arctan2(lams.imag, lams.real)
             + 1j * (h / (2.0 * dt)) * np.log(lams.real ** 2 + lams.imag ** 2))
    m_disp = float(np.sum(energy * np.abs(omega.real - a * K)) / (p + 1))
    m_diss = float(np.sum(energy * omega.imag) / (p + 1))
    return AmplificationAnalysis(K, M, lams, vecs, mu, w, energy, omega, m_disp, m_diss)


def courant_timestep(p: int, h: float, r: float, a: float = 1.0) -> float:
    """``dt = r h / ((2p + 1) |a|)``."""
    if r <= 0:
        raise ValueError("r must be positive")
    return r * h / ((2 * p + 1) * abs(a))


def sweep_measures(p: int, tableau: ButcherTableau, h: float, r: float, Ks, a: float = 1.0,
                   beta: float = 1.0) -> list[dict]:
    """One CSV-ready row per wave parameter ``K``."""
    dt = courant_timestep(p, h, r, a)
    rows = []
    for K in Ks:
        res = analyze(p, float(K), a, h, dt, tableau, beta)
        row = {"K": float(K)}
        for l in range(p + 1):
            row[f"re_omega_{l}"] = float(res.omega[l].real)
            row[f"im_omega_{l}"] = float(res.omega[l].imag)
        for l in range(p + 1):
            row[f"beta_{l}"] = float(res.energies[l])
        row["m_disp"] = res.m_disp
        row["m_diss"] = res.m_diss
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# stability function of the time integrator


def dirk_stability_function(tableau: ButcherTableau, z):
    """``R(z) = det(I - zA + z 1 b^T) / det(I - zA)``; ``inf`` at poles."""
    a, b = tableau.a, tableau.b
    s = tableau.stages
    I = np.eye(s)
    ones_b = np.outer(np.ones(s), b)
    z_arr = np.asarray(z, dtype=complex)
    zf = z_arr.ravel()
    # stacked determinants over all sample points
    den = np.linalg.det(I[None] - zf[:, None, None] * a[None])
    num = np.linalg.det(I[None] - zf[:, None, None] * (a - ones_b)[None])
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(np.abs(den) > 0.0, num / np.where(den == 0, 1, den), np.inf)
    R = R.reshape(z_arr.shape)
    return complex(R) if R.ndim == 0 else R


@dataclass
class StabilityScan:
    re: np.ndarray
    im: np.ndarray
    abs_R: np.ndarray
    a_stable: bool
    max_left: float
    r_infinity: float

    @property
    def region(self) -> np.ndarray:
        """Boolean mask of ``|R(z)| <= 1`` on the grid (rows: imaginary part)."""
        return self.abs_R <= 1.0


def stability_scan(tableau: ButcherTableau, re_range=(-20.0, 5.0), im_range=(-15.0, 15.0),
                   samples: int = 600, tol: float = 1e-12) -> StabilityScan:
    """``|R|`` on a rectangle plus an A-stability verdict.

    The verdict uses the rectangle's left half, the imaginary axis sampled on a
    log scale up to 1e8, and the poles ``1/a_rr``, which must lie in Re z > 0.
    """
    re = np.linspace(*re_range, samples)
    im = np.linspace(*im_range, samples)
    Z = re[None, :] + 1j * im[:, None]
    absR = np.abs(dirk_stability_function(tableau, Z))
    left = absR[:, re <= 0.0]
    max_left = float(np.max(left)) if left.size else 0.0
    y = np.concatenate([np.linspace(0.0, 10.0, 2001), np.logspace(1, 8, 2000)])
    axis = np.abs(dirk_stability_function(tableau, 1j * y))
    poles_ok = bool(np.all(np.diag(tableau.a) > 0.0))
    a_stable = poles_ok and max_left <= 1.0 + tol and float(np.max(axis)) <= 1.0 + tol
    r_inf = abs(dirk_stability_function(tableau, -1e8))
    return StabilityScan(re, im, absR, a_stable, max(max_left, float(np.max(axis))), r_inf)
