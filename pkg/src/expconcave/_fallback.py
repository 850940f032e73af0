"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and return tuples; used when the extension is not built or
``EXPCONCAVE_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

import math

import numpy as np

from .linalg import SpdState, project_ball_M
from .losses import DOMAIN_TOL, DomainError, LossKind, _raw_derivative, _raw_value

_KINDS = {0: LossKind.SQUARED_MARGIN, 1: LossKind.LOGISTIC}


def project_ball(M, u, R, tol=1e-10, max_iter=200):
    return project_ball_M(np.asarray(M), np.asarray(u), R, tol=tol, max_iter=max_iter, return_info=True)


def _state(M, Minv, logdet, refactor_every, since):
    st = SpdState(M, Minv, logdet, refactor_every)
    # share buffers so updates land in the caller's arrays
    st.matrix_M = M
    st.inverse_M = Minv
    st.updates_since_refactor = since
    return st


def rank_one_sequence(M, Minv, logdet, X, refactor_every=512, since=0):
    st = _state(M, Minv, logdet, refactor_every, since)
    n = X.shape[0]
    quads = np.empty(n)
    logdets = np.empty(n)
    for i in range(n):
        quads[i] = st.update(X[i])
        # refactor() rebinds inverse_M; copy back into the caller's buffer
        if st.inverse_M is not Minv:
            Minv[...] = st.inverse_M
            st.inverse_M = Minv
        logdets[i] = st.logdet_M
    return quads, logdets, st.updates_since_refactor


def _margin(w, x, y, R, step):
    m = y * float(w @ x)
    if abs(m) > R + DOMAIN_TOL:
        raise DomainError(f"margin |z|={abs(m)!r} exceeds radius R={R!r} at step {step}")
    return m


def ons_run(X, Y, kind, R, eta1, a, literal=False, refactor_every=512, tol=1e-10, max_iter=200):
    kind = _KINDS[kind]
    n, d = X.shape
    st = SpdState.scaled_identity(d, a, refactor_every=refactor_every)
    w = np.zeros(d)
    iterates = np.empty((n, d))
    losses = np.empty(n)
    quads = np.empty(n)
    logdets = np.empty(n)
    for i in range(n):
        x, y = X[i], Y[i]
        iterates[i] = w
        m = _margin(w, x, y, R, i + 1)
        losses[i] = _raw_value(kind, np.float64(m))
        quads[i] = st.update(x)
        logdets[i] = st.logdet_M
        dl = float(_raw_derivative(kind, np.float64(m)))
        coef = dl if literal else y * dl
        u = w - eta1 * coef * (st.inverse_M @ x)
        w = project_ball_M(st.matrix_M, u, R, tol=tol, max_iter=max_iter)
    return (iterates, losses, quads, logdets, w, st.matrix_M, st.inverse_M,
            st.logdet_M, st.updates_since_refactor)


def ogd_run(X, Y, kind, R, step_c, literal=False):
    kind = _KINDS[kind]
    n, d = X.shape
    w = np.zeros(d)
    iterates = np.empty((n, d))
    losses = np.empty(n)
    for i in range(n):
        x, y = X[i], Y[i]
        iterates[i] = w
        m = _margin(w, x, y, R, i + 1)
        losses[i] = _raw_value(kind, np.float64(m))
        dl = float(_raw_derivative(kind, np.float64(m)))
        coef = dl if literal else y * dl
        w = w - (step_c / math.sqrt(i + 1.0)) * coef * x
        nw = float(np.linalg.norm(w))
        if nw > R:
            w = w * (R / nw)
    return iterates, losses, w
