# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the online learners.

Mirrors ``expconcave._fallback`` operation by operation; the two agree up to
floating-point rounding (loop order differs from BLAS).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, fabs, isfinite

from expconcave.losses import DomainError
from expconcave.linalg import NumericError, ProjectionError

cnp.import_array()

DEF DOMAIN_TOL = 1e-12


cdef inline double _loss(int kind, double z) noexcept nogil:
    if kind == 0:
        return (1.0 - z) * (1.0 - z)
    if z >= 0:
        return log1p(exp(-z))
    return -z + log1p(exp(z))


cdef inline double _dloss(int kind, double z) noexcept nogil:
    cdef double e
    if kind == 0:
        return -2.0 * (1.0 - z)
    if z >= 0:
        e = exp(-z)
        return -e / (1.0 + e)
    return -1.0 / (1.0 + exp(z))


cdef int _cholesky(double[:, ::1] A, double[:, ::1] L, double shift, int d) noexcept nogil:
    """Lower Cholesky factor of A + shift*I into L; returns 0 on success."""
    cdef int i, j, k
    cdef double s
    for j in range(d):
        s = A[j, j] + shift
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not (s > 0.0):
            return 1
        L[j, j] = sqrt(s)
        for i in range(j + 1, d):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / L[j, j]
        for i in range(j):
            L[i, j] = 0.0
    return 0


cdef void _forward(double[:, ::1] L, double[::1] b, double[::1] out, int d) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(d):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * out[k]
        out[i] = s / L[i, i]


cdef void _backward(double[:, ::1] L, double[::1] b, double[::1] out, int d) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(d - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, d):
            s -= L[k, i] * out[k]
        out[i] = s / L[i, i]


cdef double _refactor(double[:, ::1] M, double[:, ::1] Minv, double[:, ::1] L,
                      double[::1] e, double[::1] t, int d) except? -1e300:
    """Fresh inverse of M into Minv; returns log det M."""
    cdef int i, j
    cdef double logdet = 0.0
    if _cholesky(M, L, 0.0, d) != 0:
        raise NumericError("matrix lost positive definiteness")
    for i in range(d):
        logdet += 2.0 * log(L[i, i])
    for j in range(d):
        for i in range(d):
            e[i] = 1.0 if i == j else 0.0
        _forward(L, e, t, d)
        _backward(L, t, e, d)
        for i in range(d):
            Minv[i, j] = e[i]
    for i in range(d):
        for j in range(i + 1, d):
            Minv[i, j] = 0.5 * (Minv[i, j] + Minv[j, i])
            Minv[j, i] = Minv[i, j]
    return logdet


cdef double _update(double[:, ::1] M, double[:, ::1] Minv, double[::1] x, double[::1] g,
                    double* logdet, int d) noexcept nogil:
    """Rank-one update; returns s = x^T Minv_old x, or NaN if 1 + s <= 0."""
    cdef int i, j
    cdef double s = 0.0, denom
    for i in range(d):
        g[i] = 0.0
        for j in range(d):
            g[i] += Minv[i, j] * x[j]
        s += x[i] * g[i]
    denom = 1.0 + s
    if not (isfinite(s) and denom > 0.0):
        return 0.0 / 0.0
    for i in range(d):
        for j in range(d):
            M[i, j] += x[i] * x[j]
            Minv[i, j] -= g[i] * g[j] / denom
    logdet[0] += log1p(s)
    return s


cdef int _project(double[:, ::1] M, double[::1] u, double R, double tol, int max_iter,
                  double[:, ::1] L, double[::1] b, double[::1] w, double[::1] z,
                  double* lam_out) noexcept nogil:
    """Mahalanobis projection of u onto the R-ball into w.

    Returns the iteration count, 0 if u was feasible, -1 on failure.
    """
    cdef int i, j, it
    cdef int d = M.shape[0]
    cdef double nu = 0.0, nw, qz, lo, hi, lam, cand, step
    for i in range(d):
        nu += u[i] * u[i]
    lam_out[0] = 0.0
    if sqrt(nu) <= R:
        for i in range(d):
            w[i] = u[i]
        return 0
    hi = 0.0
    for i in range(d):
        b[i] = 0.0
        for j in range(d):
            b[i] += M[i, j] * u[j]
        hi += b[i] * b[i]
    lo = 0.0
    hi = sqrt(hi) / R
    lam = 0.0
    for it in range(1, max_iter + 1):
        if _cholesky(M, L, lam, d) != 0:
            return -1
        _forward(L, b, z, d)
        _backward(L, z, w, d)
        nw = 0.0
        for i in range(d):
            nw += w[i] * w[i]
        nw = sqrt(nw)
        if fabs(nw - R) <= tol * R:
            if nw > R:
                for i in range(d):
                    w[i] *= R / nw
            lam_out[0] = lam
            return it
        if nw > R:
            lo = lam
        else:
            hi = lam
        _forward(L, w, z, d)
        qz = 0.0
        for i in range(d):
            qz += z[i] * z[i]
        step = (nw - R) / R * nw * nw / qz
        cand = lam + step
        if lo < cand and cand < hi:
            lam = cand
        else:
            lam = 0.5 * (lo + hi)
    return -1


def project_ball(double[:, ::1] M, double[::1] u, double R, double tol=1e-10, int max_iter=200):
    cdef int d = M.shape[0]
    cdef double[:, ::1] L = np.zeros((d, d))
    cdef double[::1] b = np.zeros(d), z = np.zeros(d)
    w = np.zeros(d)
    cdef double[::1] wv = w
    cdef double lam = 0.0
    cdef int it = _project(M, u, R, tol, max_iter, L, b, wv, z, &lam)
    if it < 0:
        raise ProjectionError(f"ball projection did not converge in {max_iter} iterations",
                              float(np.linalg.cond(np.asarray(M))))
    return w, lam, it


def rank_one_sequence(double[:, ::1] M, double[:, ::1] Minv, double logdet,
                      double[:, ::1] X, int refactor_every=512, int since=0):
    """Apply the rows of X as rank-one updates in place.

    Returns (quads, logdets, since) where ``quads[i] = x_i^T M_i^{-1} x_i``
    and ``logdets[i] = log det M_i``.
    """
    cdef int n = X.shape[0], d = X.shape[1], i
    cdef double s
    cdef double[:, ::1] L = np.zeros((d, d))
    cdef double[::1] g = np.zeros(d), e = np.zeros(d), t = np.zeros(d)
    quads = np.empty(n)
    logdets = np.empty(n)
    cdef double[::1] qv = quads, lv = logdets
    for i in range(n):
        s = _update(M, Minv, X[i], g, &logdet, d)
        if s != s:
            logdet = _refactor(M, Minv, L, e, t, d)
            since = 0
            s = _update(M, Minv, X[i], g, &logdet, d)
            if s != s:
                raise NumericError("rank-one denominator 1 + x^T M^-1 x <= 0")
        since += 1
        if since >= refactor_every:
            logdet = _refactor(M, Minv, L, e, t, d)
            since = 0
        qv[i] = s / (1.0 + s)
        lv[i] = logdet
    return quads, logdets, since


def ons_run(double[:, ::1] X, double[::1] Y, int kind, double R, double eta1, double a,
            bint literal=False, int refactor_every=512, double tol=1e-10, int max_iter=200):
    """Run the online Newton variant from ``w_1 = 0``, ``M_0 = a I``.

    Returns (iterates, losses, quads, logdets, w_next, M, Minv, logdet, since)
    where row i of ``iterates`` is the iterate used on example i.
    """
    cdef int n = X.shape[0], d = X.shape[1], i, j, k, it
    cdef double s, m, dl, coef, lam, logdet = d * log(a)
    cdef int since = 0
    M_arr = np.eye(d) * a
    Minv_arr = np.eye(d) / a
    cdef double[:, ::1] M = M_arr, Minv = Minv_arr
    cdef double[:, ::1] L = np.zeros((d, d))
    cdef double[::1] g = np.zeros(d), e = np.zeros(d), t = np.zeros(d)
    cdef double[::1] u = np.zeros(d), b = np.zeros(d), z = np.zeros(d)
    w_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    iterates = np.empty((n, d))
    losses = np.empty(n)
    quads = np.empty(n)
    logdets = np.empty(n)
    cdef double[:, ::1] itv = iterates
    cdef double[::1] lv = losses, qv = quads, ldv = logdets
    for i in range(n):
        m = 0.0
        for j in range(d):
            itv[i, j] = w[j]
            m += w[j] * X[i, j]
        m *= Y[i]
        if fabs(m) > R + DOMAIN_TOL:
            raise DomainError(f"margin |z|={fabs(m)!r} exceeds radius R={R!r} at step {i + 1}")
        lv[i] = _loss(kind, m)
        s = _update(M, Minv, X[i], g, &logdet, d)
        if s != s:
            logdet = _refactor(M, Minv, L, e, t, d)
            since = 0
            s = _update(M, Minv, X[i], g, &logdet, d)
            if s != s:
                raise NumericError("rank-one denominator 1 + x^T M^-1 x <= 0")
        since += 1
        if since >= refactor_every:
            logdet = _refactor(M, Minv, L, e, t, d)
            since = 0
        qv[i] = s / (1.0 + s)
        ldv[i] = logdet
        dl = _dloss(kind, m)
        coef = dl if literal else Y[i] * dl
        # u = w - eta1 * Minv @ (coef * x)
        for j in range(d):
            s = 0.0
            for k in range(d):
                s += Minv[j, k] * X[i, k]
            u[j] = w[j] - eta1 * coef * s
        it = _project(M, u, R, tol, max_iter, L, b, w, z, &lam)
        if it < 0:
            raise ProjectionError(f"ball projection did not converge in {max_iter} iterations",
                                  float(np.linalg.cond(M_arr)))
    return iterates, losses, quads, logdets, w_arr, M_arr, Minv_arr, logdet, since


def ogd_run(double[:, ::1] X, double[::1] Y, int kind, double R, double step_c,
            bint literal=False):
    """Projected online gradient descent with steps ``step_c / sqrt(i)``.

    Returns (iterates, losses, w_next).
    """
    cdef int n = X.shape[0], d = X.shape[1], i, j
    cdef double m, dl, coef, eta, nw
    w_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    iterates = np.empty((n, d))
    losses = np.empty(n)
    cdef double[:, ::1] itv = iterates
    cdef double[::1] lv = losses
    for i in range(n):
        m = 0.0
        for j in range(d):
            itv[i, j] = w[j]
            m += w[j] * X[i, j]
        m *= Y[i]
        if fabs(m) > R + DOMAIN_TOL:
            raise DomainError(f"margin |z|={fabs(m)!r} exceeds radius R={R!r} at step {i + 1}")
        lv[i] = _loss(kind, m)
        dl = _dloss(kind, m)
        coef = dl if literal else Y[i] * dl
        eta = step_c / sqrt(i + 1.0)
        nw = 0.0
        for j in range(d):
            w[j] -= eta * coef * X[i, j]
            nw += w[j] * w[j]
        nw = sqrt(nw)
        if nw > R:
            for j in range(d):
                w[j] *= R / nw
    return iterates, losses, w_arr
