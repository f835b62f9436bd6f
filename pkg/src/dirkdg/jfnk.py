"""Jacobian-free Newton-Krylov: matrix-free GMRES inside a plain Newton iteration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels

SQRT_EPS = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-5
    newton_maxiter: int = 30
    krylov_tol: float = 1e-5
    krylov_maxiter: int = 100

    def __post_init__(self):
        for name in ("newton_tol", "krylov_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("newton_maxiter", "krylov_maxiter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class GMRESResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool
    breakdown: bool = False


def gmres(apply_a: Callable, rhs: np.ndarray, tol: float = 1e-5, maxiter: int = 100,
          x0: np.ndarray | None = None, backend: str | None = None) -> GMRESResult:
    """Unrestarted, unpreconditioned GMRES with Givens rotations.

    Stops when ``||A x - rhs|| <= tol ||rhs||`` or after ``maxiter`` iterations.
    Arnoldi vectors are orthogonalised by classical Gram-Schmidt applied twice.
    """
    b = np.asarray(rhs, dtype=float).ravel()
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return GMRESResult(np.zeros(n), 0, 0.0, True)
    core = kernels.get_gmres(backend)
    if x0 is None:
        x, k, res, breakdown = core(apply_a, b, tol, maxiter)
        return GMRESResult(x, k, res, res <= tol * bnorm, breakdown)
    x0 = np.asarray(x0, dtype=float).ravel()
    r = b - apply_a(x0)
    rnorm = np.linalg.norm(r)
    if rnorm <= tol * bnorm:
        return GMRESResult(x0.copy(), 0, rnorm, True)
    d, k, res, breakdown = core(apply_a, r, tol * bnorm / rnorm, maxiter)
    return GMRESResult(x0 + d, k, res, res <= tol * bnorm, breakdown)


def fd_epsilon(u: np.ndarray, v: np.ndarray) -> float:
    vnorm = np.linalg.norm(v)
    return SQRT_EPS * (1.0 + np.linalg.norm(u)) / vnorm


def jv_product(G: Callable, u: np.ndarray, v: np.ndarray, Gu: np.ndarray | None = None,
               eps: float | None = None) -> np.ndarray:
    """Finite-difference directional derivative (G(u + eps v) - G(u)) / eps; 0 for v = 0."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return np.zeros_like(v)
    if Gu is None:
        Gu = G(u)
    if eps is None:
        eps = fd_epsilon(u, v)
    return (G(u + eps * v) - Gu) / eps


class NewtonConvergenceError(RuntimeError):
    """Newton failed; ``best`` is the iterate with the smallest residual."""

    def __init__(self, message: str, report: "NewtonReport", best: np.ndarray | None = None):
        super().__init__(message)
        self.report = report
        self.best = best


@dataclass
class NewtonReport:
    iterations: int = 0
    krylov_iterations: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    converged: bool = False

    @property
    def total_krylov(self) -> int:
        return int(sum(self.krylov_iterations))


STAGNATION_FACTOR = 0.99
STAGNATION_COUNT = 3


def jfnk_solve(G: Callable, u0: np.ndarray, config: SolverConfig = SolverConfig(),
               affine: bool = False) -> tuple[np.ndarray, NewtonReport]:
    """Solve G(u) = 0 with ``||G||_inf <= newton_tol``.

    Each Newton step solves J du = -G(u) by GMRES with finite-difference
    Jacobian-vector products.  ``affine=True`` declares G affine, in which case
    the products are the exact differences G(v) - G(0) and need no epsilon.
    Fails after ``newton_maxiter`` iterations, on a non-finite residual, or when
    three consecutive iterations each reduce the residual by less than 1%.
    """
    u = np.array(u0, dtype=float).ravel()
    report = NewtonReport()
    Gu = np.asarray(G(u), dtype=float).ravel()
    norm = float(np.max(np.abs(Gu))) if Gu.size else 0.0
    report.residual_history.append(norm)
    best, best_norm = u, norm
    stalled = 0
    while norm > config.newton_tol:
        if not np.all(np.isfinite(Gu)):
            raise NewtonConvergenceError("non-finite residual", report, best)
        if report.iterations >= config.newton_maxiter:
            raise NewtonConvergenceError(
                f"Newton did not converge in {config.newton_maxiter} iterations "
                f"(residual {norm:.3e})", report, best)
        if stalled >= STAGNATION_COUNT:
            raise NewtonConvergenceError(
                f"Newton stagnated after {report.iterations} iterations "
                f"(residual {norm:.3e})", report, best)
        if affine:
            G0 = np.asarray(G(np.zeros_like(u)), dtype=float).ravel()

            def apply(v, G0=G0):
                return np.asarray(G(v), dtype=float).ravel() - G0
        else:
            unorm = np.linalg.norm(u)

            def apply(v, u=u, Gu=Gu, unorm=unorm):
                vn = np.linalg.norm(v)
                if vn == 0.0:
                    return np.zeros_like(v)
                eps = SQRT_EPS * (1.0 + unorm) / vn
                return (np.asarray(G(u + eps * v), dtype=float).ravel() - Gu) / eps

        res = gmres(apply, -Gu, config.krylov_tol, config.krylov_maxiter)
        report.krylov_iterations.append(res.iterations)
        u = u + res.x
        report.iterations += 1
        Gu = np.asarray(G(u), dtype=float).ravel()
        previous, norm = norm, float(np.max(np.abs(Gu)))
        report.residual_history.append(norm)
        stalled = stalled + 1 if norm > STAGNATION_FACTOR * previous else 0
        if norm < best_norm:
            best, best_norm = u, norm
    report.converged = True
    return u, report

