"""Pure numpy residual kernel; the reference the compiled kernel is checked against."""

from __future__ import annotations

import numpy as np

from .basis import VOLUME_RULE, eval_legendre, eval_legendre_deriv
from .problems import BURGERS, EULER, LINEAR, MATERIAL

_NODES = np.asarray(VOLUME_RULE.nodes)
_WEIGHTS = np.asarray(VOLUME_RULE.weights)
# per degree p: values zeta_l(xi_q) (q, l) and weighted derivatives w_q zeta_l'(xi_q) (q, l)
_VDM = {p: np.stack([eval_legendre(l, _NODES) for l in range(p + 1)], axis=-1) for p in range(3)}
_DVDM = {p: np.stack([_WEIGHTS * eval_legendre_deriv(l, _NODES) for l in range(p + 1)], axis=-1)
         for p in range(3)}


def _physical_flux(u, code, params):
    if code == LINEAR:
        m = u.shape[-1]
        A = params[1:1 + m * m].reshape(m, m)
        return u @ A.T
    if code == BURGERS:
        return 0.25 * u * u
    gamma = params[0]
    rho, mom, E = u[..., 0], u[..., 1], u[..., 2]
    v = mom / rho
    p = (gamma - 1.0) * (E - 0.5 * mom * v)
    return np.stack([mom, mom * v + p, v * (E + p)], axis=-1)


def _viscosity(um, up, code, params):
    if code == LINEAR:
        return np.full(um.shape[:-1], params[0])
    if code == BURGERS:
        return 0.5 * np.maximum(np.abs(um[..., 0]), np.abs(up[..., 0]))
    gamma = params[0]
    vm = um[..., 1] / um[..., 0]
    vp = up[..., 1] / up[..., 0]
    if int(params[1]) == MATERIAL:
        return np.maximum(np.abs(vm), np.abs(vp))

    def speed(q, v):
        p = (gamma - 1.0) * (q[..., 2] - 0.5 * q[..., 1] * v)
        return np.abs(v) + np.sqrt(gamma * np.maximum(p, 0.0) / q[..., 0])

    return np.maximum(speed(um, vm), speed(up, vp))


def _count_invalid(values, gamma):
    rho = values[..., 0]
    p = (gamma - 1.0) * (values[..., 2] - 0.5 * values[..., 1] ** 2 / rho)
    return int(np.count_nonzero(~((rho > 0.0) & (p > 0.0))))


def residual(u: np.ndarray, code: int, params: np.ndarray, periodic: bool,
             out: np.ndarray) -> int:
    """Fill ``out`` with K = -Q + F_{j+1/2} - (-1)^l F_{j-1/2}; returns the invalid-state count."""
    N, P, m = u.shape
    p = P - 1
    right = u.sum(axis=1)
    left = np.einsum("l,jlm->jm", (-1.0) ** np.arange(P), u)

    # interface i sits at x_{i-1/2}: minus side is cell i-1, plus side is cell i
    um = np.empty((N + 1, m))
    up = np.empty((N + 1, m))
    um[1:] = right
    up[:-1] = left
    if periodic:
        um[0] = right[-1]
        up[-1] = left[0]
    else:
        # ghost cells copy the boundary cell's polynomial
        um[0] = right[0]
        up[-1] = left[-1]

    invalid = 0
    nodal = np.einsum("ql,jlm->jqm", _VDM[p], u)
    if code == EULER:
        invalid = _count_invalid(um, params[0]) + _count_invalid(up, params[0])
        if p > 0:
            invalid += _count_invalid(nodal, params[0])
        if invalid:
            return invalid

    fm, fp = _physical_flux(um, code, params), _physical_flux(up, code, params)
    alpha = _viscosity(um, up, code, params)[:, None]
    F = 0.5 * (fm + fp) - 0.5 * alpha * (up - um)

    signs = (-1.0) ** np.arange(P)
    out[...] = F[1:, None, :] - signs[None, :, None] * F[:-1, None, :]
    if p > 0:
        fq = _physical_flux(nodal, code, params)
        out -= np.einsum("ql,jqm->jlm", _DVDM[p], fq)
    return invalid


def gmres_core(apply_a, b, tol, maxiter):
    """Arnoldi (CGS2) with Givens rotations from x0 = 0; returns (x, k, res, breakdown)."""
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0, False
    target = tol * bnorm
    m = min(maxiter, n)
    V = np.empty((m + 1, n))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = bnorm
    V[0] = b / bnorm
    k = 0
    res = bnorm
    breakdown = False
    while k < m:
        w = np.array(apply_a(V[k]), dtype=float)
        h = V[: k + 1] @ w
        w -= h @ V[: k + 1]
        h2 = V[: k + 1] @ w
        w -= h2 @ V[: k + 1]
        h += h2
        hn = np.linalg.norm(w)
        H[: k + 1, k] = h
        H[k + 1, k] = hn
        for i in range(k):
            t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = t
        denom = np.hypot(H[k, k], H[k + 1, k])
        cs[k], sn[k] = H[k, k] / denom, H[k + 1, k] / denom
        H[k, k] = denom
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        res = abs(g[k + 1])
        k += 1
        if res <= target:
            break
        if hn <= 1e-14 * np.linalg.norm(h):
            breakdown = True
            break
        V[k] = w / hn
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:k]) / H[i, i]
    return y @ V[:k], k, res, breakdown
