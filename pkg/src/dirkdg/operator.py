"""Semi-discrete DG operator: volume quadrature and the stage residual K."""

from __future__ import annotations

import numpy as np

from . import kernels
from .basis import VOLUME_RULE, DGState, eval_legendre, eval_legendre_deriv
from .problems import PERIODIC, InvalidStateError, ProblemSpec


def _moments(state) -> np.ndarray:
    u = state.moments if isinstance(state, DGState) else state
    return np.ascontiguousarray(u, dtype=float)


def volume_term(state, spec: ProblemSpec, j: int, l: int) -> np.ndarray:
    """Q(u_h; l) = sum_q w_q f(u_h(xi_q)) zeta_l'(xi_q) in cell ``j`` (3-point Gauss rule)."""
    u = _moments(state)
    p = u.shape[1] - 1
    if not 0 <= l <= p:
        raise ValueError(f"degree {l} outside 0..{p}")
    if l == 0:
        return np.zeros(u.shape[2])
    nodes, weights = VOLUME_RULE.nodes, VOLUME_RULE.weights
    vdm = np.stack([eval_legendre(k, nodes) for k in range(p + 1)], axis=-1)
    vals = vdm @ u[j]
    fq = spec.model.flux(vals)
    return (weights * eval_legendre_deriv(l, nodes)) @ fq


def stage_residual(state, spec: ProblemSpec, boundary: str | None = None,
                   out: np.ndarray | None = None, backend: str | None = None) -> np.ndarray:
    """K_j^(l) = -Q(u_h; l) + F_{j+1/2} - (-1)^l F_{j-1/2} for every cell and degree.

    The semi-discrete system is du^(l)/dt = -(2l + 1)/h K^(l).
    """
    u = _moments(state)
    if u.shape[2] != spec.ncomp:
        raise ValueError(f"state has {u.shape[2]} components, problem expects {spec.ncomp}")
    if out is None:
        out = np.empty_like(u)
    bc = boundary or spec.boundary
    invalid = kernels.get_residual(backend)(u, spec.model.code, spec.model.kernel_params(),
                                            bc == PERIODIC, out)
    if invalid:
        raise InvalidStateError(f"{invalid} non-physical states met in the residual")
    return out


def semidiscrete_rhs(state, spec: ProblemSpec, h: float, boundary: str | None = None) -> np.ndarray:
    """du/dt of the semi-discrete scheme."""
    K = stage_residual(state, spec, boundary)
    scale = (2 * np.arange(K.shape[1]) + 1.0) / h
    return -scale[None, :, None] * K
