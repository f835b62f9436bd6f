# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled residual kernel; mirrors ``_kernels_py.residual`` loop for loop."""

from libc.math cimport fabs, sqrt, fmax

cdef enum:
    MAXM = 8

cdef double S35 = 0.7745966692414834   # sqrt(3/5)
cdef double W_OUT = 5.0 / 9.0
cdef double W_MID = 8.0 / 9.0

cdef enum:
    LINEAR = 0
    BURGERS = 1
    EULER = 2


cdef inline int euler_valid(const double* q, double gamma) noexcept nogil:
    if q[0] <= 0.0:
        return 0
    return (gamma - 1.0) * (q[2] - 0.5 * q[1] * q[1] / q[0]) > 0.0


cdef inline void phys_flux(const double* q, double* f, int m, int code,
                           const double* params) noexcept nogil:
    cdef int a, b
    cdef double s, v, p, g
    if code == LINEAR:
        for a in range(m):
            s = 0.0
            for b in range(m):
                s += params[1 + a * m + b] * q[b]
            f[a] = s
    elif code == BURGERS:
        f[0] = 0.25 * q[0] * q[0]
    else:
        g = params[0]
        v = q[1] / q[0]
        p = (g - 1.0) * (q[2] - 0.5 * q[1] * v)
        f[0] = q[1]
        f[1] = q[1] * v + p
        f[2] = v * (q[2] + p)


cdef inline double euler_speed(const double* q, double g) noexcept nogil:
    cdef double v = q[1] / q[0]
    cdef double p = (g - 1.0) * (q[2] - 0.5 * q[1] * v)
    return fabs(v) + sqrt(g * fmax(p, 0.0) / q[0])


cdef inline double viscosity(const double* qm, const double* qp, int code,
                             const double* params) noexcept nogil:
    if code == LINEAR:
        return params[0]
    if code == BURGERS:
        return 0.5 * fmax(fabs(qm[0]), fabs(qp[0]))
    if <int>params[1] == 0:
        return fmax(fabs(qm[1] / qm[0]), fabs(qp[1] / qp[0]))
    return fmax(euler_speed(qm, params[0]), euler_speed(qp, params[0]))


cdef inline void trace(const double* cell, Py_ssize_t P, Py_ssize_t m, int side,
                       double* q) noexcept nogil:
    # side +1: right edge sum_l u^(l); side -1: left edge sum_l (-1)^l u^(l)
    cdef Py_ssize_t l, c
    cdef double sgn = 1.0
    for c in range(m):
        q[c] = 0.0
    for l in range(P):
        for c in range(m):
            q[c] += sgn * cell[l * m + c]
        if side < 0:
            sgn = -sgn


def residual(const double[:, :, ::1] u, int code, const double[::1] params, bint periodic,
             double[:, :, ::1] out):
    """Fill ``out`` with the stage residual K; returns the number of invalid gas states."""
    cdef Py_ssize_t N = u.shape[0]
    cdef Py_ssize_t P = u.shape[1]
    cdef Py_ssize_t m = u.shape[2]
    cdef Py_ssize_t i, j, l, c, q
    cdef double qm[MAXM]
    cdef double qp[MAXM]
    cdef double fm[MAXM]
    cdef double fp[MAXM]
    cdef double Fprev[MAXM]
    cdef double Fcur[MAXM]
    cdef double val[MAXM]
    cdef double fq[MAXM]
    cdef double alpha, y, w, z1, z2, sgn
    cdef double nodes[3]
    cdef double weights[3]
    cdef int invalid = 0
    cdef const double* prm = &params[0]
    cdef const double* U = &u[0, 0, 0]
    cdef double* K = &out[0, 0, 0]
    cdef Py_ssize_t stride = P * m

    if m > MAXM:
        raise ValueError("too many components for the compiled kernel")
    if out.shape[0] != N or out.shape[1] != P or out.shape[2] != m:
        raise ValueError("output shape does not match the moments")
    nodes[0] = S35; nodes[1] = 0.0; nodes[2] = -S35
    weights[0] = W_OUT; weights[1] = W_MID; weights[2] = W_OUT

    with nogil:
        for i in range(N + 1):
            # interface x_{i-1/2}
            if i == 0:
                trace(U + (N - 1 if periodic else 0) * stride, P, m, 1, qm)
            else:
                trace(U + (i - 1) * stride, P, m, 1, qm)
            if i == N:
                trace(U + (0 if periodic else N - 1) * stride, P, m, -1, qp)
            else:
                trace(U + i * stride, P, m, -1, qp)
            if code == EULER and not (euler_valid(qm, prm[0]) and euler_valid(qp, prm[0])):
                invalid += (not euler_valid(qm, prm[0])) + (not euler_valid(qp, prm[0]))
                continue
            phys_flux(qm, fm, m, code, prm)
            phys_flux(qp, fp, m, code, prm)
            alpha = viscosity(qm, qp, code, prm)
            for c in range(m):
                Fcur[c] = 0.5 * (fm[c] + fp[c]) - 0.5 * alpha * (qp[c] - qm[c])
            if i > 0:
                j = i - 1
                sgn = 1.0
                for l in range(P):
                    for c in range(m):
                        K[j * stride + l * m + c] = Fcur[c] - sgn * Fprev[c]
                    sgn = -sgn
            for c in range(m):
                Fprev[c] = Fcur[c]

        # every trace and node is checked so both backends report the same count
        if P > 1:
            for j in range(N):
                for q in range(3):
                    y = nodes[q]
                    w = weights[q]
                    z1 = y
                    z2 = 0.5 * (3.0 * y * y - 1.0)
                    for c in range(m):
                        val[c] = U[j * stride + c] + U[j * stride + m + c] * z1
                        if P > 2:
                            val[c] += U[j * stride + 2 * m + c] * z2
                    if code == EULER and not euler_valid(val, prm[0]):
                        invalid += 1
                        continue
                    phys_flux(val, fq, m, code, prm)
                    # zeta_1' = 1, zeta_2' = 3 y
                    for c in range(m):
                        K[j * stride + m + c] -= w * fq[c]
                        if P > 2:
                            K[j * stride + 2 * m + c] -= 3.0 * w * y * fq[c]
    return invalid


from scipy.linalg.cython_blas cimport dgemv, dnrm2, ddot
import numpy as np
cimport numpy as cnp

cnp.import_array()


def gmres_core(apply_a, const double[::1] b, double tol, Py_ssize_t maxiter):
    """Arnoldi (CGS2) with Givens rotations from x0 = 0; returns (x, k, res, breakdown)."""
    cdef int n = <int>b.shape[0]
    cdef int one = 1
    cdef int m = <int>min(maxiter, n)
    cdef int k = 0, i, kk
    cdef double alpha1 = 1.0, beta0 = 0.0, minus1 = -1.0
    cdef double bnorm, target, res, hn, t, denom, hnorm
    cdef char trans_t = b'T'
    cdef char trans_n = b'N'
    cdef bint breakdown = False

    V_arr = np.empty((m + 1, n))
    H_arr = np.zeros((m + 1, m))
    cdef double[:, ::1] V = V_arr
    cdef double[:, ::1] H = H_arr
    cdef double[::1] cs = np.zeros(m)
    cdef double[::1] sn = np.zeros(m)
    cdef double[::1] g = np.zeros(m + 1)
    cdef double[::1] h = np.zeros(m + 1)
    cdef double[::1] h2 = np.zeros(m + 1)
    cdef double[::1] w

    bnorm = dnrm2(&n, &b[0], &one)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0, False
    target = tol * bnorm
    for i in range(n):
        V[0, i] = b[i] / bnorm
    g[0] = bnorm
    res = bnorm
    while k < m:
        w_arr = np.array(apply_a(V_arr[k]), dtype=float)  # a copy: apply_a may return its input
        w = w_arr
        kk = k + 1
        # h = V[:k+1] w; w -= V[:k+1]^T h, twice
        dgemv(&trans_t, &n, &kk, &alpha1, &V[0, 0], &n, &w[0], &one, &beta0, &h[0], &one)
        dgemv(&trans_n, &n, &kk, &minus1, &V[0, 0], &n, &h[0], &one, &alpha1, &w[0], &one)
        dgemv(&trans_t, &n, &kk, &alpha1, &V[0, 0], &n, &w[0], &one, &beta0, &h2[0], &one)
        dgemv(&trans_n, &n, &kk, &minus1, &V[0, 0], &n, &h2[0], &one, &alpha1, &w[0], &one)
        hnorm = 0.0
        for i in range(kk):
            h[i] += h2[i]
            H[i, k] = h[i]
            hnorm += h[i] * h[i]
        hn = dnrm2(&n, &w[0], &one)
        H[k + 1, k] = hn
        for i in range(k):
            t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = t
        denom = sqrt(H[k, k] * H[k, k] + H[k + 1, k] * H[k + 1, k])
        cs[k] = H[k, k] / denom
        sn[k] = H[k + 1, k] / denom
        H[k, k] = denom
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        res = fabs(g[k + 1])
        k += 1
        if res <= target:
            break
        if hn <= 1e-14 * sqrt(hnorm):
            breakdown = True
            break
        for i in range(n):
            V[k, i] = w[i] / hn

    # back substitution on the rotated Hessenberg matrix
    y = np.zeros(k)
    cdef double[::1] yv = y
    for i in range(k - 1, -1, -1):
        t = g[i]
        for kk in range(i + 1, k):
            t -= H[i, kk] * yv[kk]
        yv[i] = t / H[i, i]
    x = y @ V_arr[:k]
    return x, k, res, breakdown
