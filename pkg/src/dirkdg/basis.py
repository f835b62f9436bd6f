"""Legendre modal basis, quadrature, uniform grid and the DG state container.

Moments are stored cell-major in arrays of shape ``(N, p + 1, m)``: cell,
polynomial degree, conserved component.  In cell ``j`` the solution is

    u_h(x) = sum_l u_j^(l) zeta_l(2 (x - x_j) / h)

so moment 0 is the cell mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

MAX_DEGREE = 2


class UnsupportedDegreeError(ValueError):
    pass


def _check_degree(l: int) -> None:
    if not 0 <= l <= MAX_DEGREE:
        raise UnsupportedDegreeError(f"Legendre degree {l} not supported (0..{MAX_DEGREE})")


def eval_legendre(l: int, y):
    """Evaluate the Legendre polynomial of degree ``l`` at ``y`` in [-1, 1]."""
    _check_degree(l)
    y = np.asarray(y)
    if l == 0:
        out = np.ones_like(y, dtype=np.result_type(y, float))
    elif l == 1:
        out = y * 1.0
    else:
        out = 0.5 * (3.0 * y * y - 1.0)
    return out if out.ndim else out.item()


def eval_legendre_deriv(l: int, y):
    _check_degree(l)
    y = np.asarray(y)
    if l == 0:
        out = np.zeros_like(y, dtype=np.result_type(y, float))
    elif l == 1:
        out = np.ones_like(y, dtype=np.result_type(y, float))
    else:
        out = 3.0 * y
    return out if out.ndim else out.item()


@dataclass(frozen=True)
class LegendreBasis:
    """Legendre basis of degree ``p`` with its exact mass and stiffness entries.

    ``mass[l] = int zeta_l^2`` and ``stiffness[l][m] = int zeta_m zeta_l'``
    over [-1, 1], both as exact rationals.
    """

    degree: int
    mass: tuple = field(init=False)
    stiffness: tuple = field(init=False)

    def __post_init__(self):
        _check_degree(self.degree)
        n = self.degree + 1
        mass = tuple(Fraction(2, 2 * l + 1) for l in range(n))
        # zeta_l' is a combination of zeta_m with m < l and l - m odd,
        # so int zeta_m zeta_l' = 2 for those pairs and 0 otherwise.
        stiff = tuple(
            tuple(Fraction(2) if (m < l and (l - m) % 2 == 1) else Fraction(0) for m in range(n))
            for l in range(n)
        )
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "stiffness", stiff)

    @property
    def size(self) -> int:
        return self.degree + 1

    def mass_array(self) -> np.ndarray:
        return np.array([float(z) for z in self.mass])

    def stiffness_array(self) -> np.ndarray:
        return np.array([[float(z) for z in row] for row in self.stiffness])

    def vandermonde(self, y) -> np.ndarray:
        """Rows: points ``y``; columns: ``zeta_l(y)``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.stack([eval_legendre(l, y) for l in range(self.size)], axis=-1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, g: Callable) -> float:
        return np.sum(self.weights * g(self.nodes))


@lru_cache(maxsize=None)
def gauss_legendre(npoints: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1], exact for degree ``2 * npoints - 1``."""
    if npoints == 3:
        # the rule of the P2 volume term, written out exactly
        s = np.sqrt(3.0 / 5.0)
        nodes = np.array([s, 0.0, -s])
        weights = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
    else:
        nodes, weights = np.polynomial.legendre.leggauss(npoints)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


VOLUME_RULE = gauss_legendre(3)
PROJECTION_POINTS = 6


@dataclass(frozen=True)
class Grid1D:
    ncells: int
    xmin: float
    xmax: float

    def __post_init__(self):
        if self.ncells < 1:
            raise ValueError("ncells must be positive")
        if not self.xmax > self.xmin:
            raise ValueError("empty domain")

    @property
    def length(self) -> float:
        return self.xmax - self.xmin

    @property
    def h(self) -> float:
        return self.length / self.ncells

    @property
    def centers(self) -> np.ndarray:
        return self.xmin + (np.arange(self.ncells) + 0.5) * self.h

    @property
    def edges(self) -> np.ndarray:
        return self.xmin + np.arange(self.ncells + 1) * self.h

    def points(self, y) -> np.ndarray:
        """Physical coordinates of reference points ``y``, shape ``(N, len(y))``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.centers[:, None] + 0.5 * self.h * y[None, :]


@dataclass
class DGState:
    moments: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.moments = np.asarray(self.moments)
        if self.moments.ndim != 3:
            raise ValueError("moments must have shape (N, p + 1, m)")
        _check_degree(self.moments.shape[1] - 1)

    @property
    def ncells(self) -> int:
        return self.moments.shape[0]

    @property
    def degree(self) -> int:
        return self.moments.shape[1] - 1

    @property
    def ncomp(self) -> int:
        return self.moments.shape[2]

    @property
    def means(self) -> np.ndarray:
        return self.moments[:, 0, :]

    def copy(self) -> "DGState":
        return DGState(self.moments.copy(), self.time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.moments)))


def _as_components(values: np.ndarray, npts: int) -> np.ndarray:
    values = np.asarray(values)
    if values.shape == (npts,):
        return values[:, None]
    if values.ndim == 2 and values.shape[0] == npts:
        return values
    raise ValueError(f"function returned shape {values.shape}, expected ({npts},) or ({npts}, m)")


def project_onto_cell(f: Callable, center: float, h: float, p: int,
                      npoints: int = PROJECTION_POINTS) -> np.ndarray:
    """L2 projection of ``f`` onto the Legendre polynomials of one cell.

    Returns the moments ``u^(l) = (1/Z_l) int_{-1}^{1} f(x_c + h y / 2) zeta_l(y) dy``
    for ``l = 0..p``; shape ``(p + 1,)`` for scalar ``f`` or ``(p + 1, m)``.
    """
    _check_degree(p)
    rule = gauss_legendre(npoints)
    x = center + 0.5 * h * rule.nodes
    vals = np.asarray(f(x))
    scalar = vals.ndim == 1
    vals = _as_components(vals, npoints)
    basis = LegendreBasis(p)
    vdm = basis.vandermonde(rule.nodes)
    moments = (vdm * rule.weights[:, None]).T @ vals / basis.mass_array()[:, None]
    return moments[:, 0] if scalar else moments


def project(f: Callable, grid: Grid1D, p: int, npoints: int = PROJECTION_POINTS,
            time: float = 0.0) -> DGState:
    """Project ``f(x)`` (vectorized; scalar or ``(npts, m)`` valued) onto V_h^p."""
    _check_degree(p)
    rule = gauss_legendre(npoints)
    x = grid.points(rule.nodes)
    vals = np.asarray(f(x.ravel()))
    vals = _as_components(vals, x.size).reshape(grid.ncells, npoints, -1)
    basis = LegendreBasis(p)
    weighted = basis.vandermonde(rule.nodes) * rule.weights[:, None]  # (q, p+1)
    moments = np.einsum("ql,jqm->jlm", weighted, vals) / basis.mass_array()[None, :, None]
    return DGState(moments, time)


def eval_dg(state: DGState | np.ndarray, j: int, y) -> np.ndarray:
    """Value of the DG polynomial of cell ``j`` at reference points ``y``.

    Returns shape ``(m,)`` for scalar ``y`` and ``(len(y), m)`` otherwise.
    """
    moments = state.moments if isinstance(state, DGState) else np.asarray(state)
    cell = moments[j]
    p = cell.shape[0] - 1
    scalar = np.ndim(y) == 0
    vdm = LegendreBasis(p).vandermonde(y)
    out = vdm @ cell
    return out[0] if scalar else out


def eval_dg_all(moments: np.ndarray, y) -> np.ndarray:
    """Point values in every cell, shape ``(N, len(y), m)``."""
    p = moments.shape[1] - 1
    vdm = LegendreBasis(p).vandermonde(y)
    return np.einsum("ql,jlm->jqm", vdm, moments)


def interface_traces(moments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-edge and left-edge traces of every cell, each of shape ``(N, m)``."""
    p = moments.shape[1] - 1
    signs = (-1.0) ** np.arange(p + 1)
    right = moments.sum(axis=1)
    left = np.einsum("l,jlm->jm", signs, moments)
    return right, left


def cell_averages(moments: np.ndarray) -> np.ndarray:
    return moments[:, 0, :]
