"""Dense SPD kernels: rank-one updates, quadratic forms, ball projection.

The matrix ``M`` accumulates outer products ``x x^T`` on top of ``a * I``.
Its inverse and log-determinant are carried along with the rank-one
(Sherman-Morrison) identities and refreshed from a Cholesky factorization
every ``refactor_every`` updates.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from .records import VerifierRecord

REFACTOR_EVERY = 512
PROJECTION_TOL = 1e-10
PROJECTION_MAX_ITER = 200
LEMMA_TOL = 1e-9


class NumericError(ArithmeticError):
    pass


class ProjectionError(NumericError):
    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class SpdState:
    """SPD matrix with maintained inverse and log-determinant.

    Single writer: :meth:`update` mutates in place.
    """

    def __init__(self, matrix, inverse=None, logdet=None, refactor_every: int = REFACTOR_EVERY):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        self.matrix_M = M
        self.refactor_every = int(refactor_every)
        self.updates_since_refactor = 0
        if inverse is None or logdet is None:
            self.refactor()
        else:
            self.inverse_M = np.array(inverse, dtype=float)
            self.logdet_M = float(logdet)

    @classmethod
    def scaled_identity(cls, dim: int, a: float, **kw) -> "SpdState":
        if dim < 1 or not a > 0:
            raise ValueError("need dim >= 1 and a > 0")
        eye = np.eye(dim)
        return cls(a * eye, eye / a, dim * math.log(a), **kw)

    @property
    def dim(self) -> int:
        return self.matrix_M.shape[0]

    def copy(self) -> "SpdState":
        out = SpdState(self.matrix_M, self.inverse_M, self.logdet_M, self.refactor_every)
        out.updates_since_refactor = self.updates_since_refactor
        return out

    def refactor(self) -> None:
        """Recompute inverse and log-det from a fresh Cholesky factorization."""
        try:
            c, low = sla.cho_factor(self.matrix_M, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericError("matrix lost positive definiteness") from exc
        inv = sla.cho_solve((c, low), np.eye(self.dim))
        self.inverse_M = 0.5 * (inv + inv.T)
        self.logdet_M = float(2.0 * np.sum(np.log(np.diag(c))))
        self.updates_since_refactor = 0

    def update(self, x) -> float:
        """``M += x x^T``; returns ``x^T M_new^{-1} x``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {x.shape}")
        g = self.inverse_M @ x
        s = float(x @ g)
        if not (math.isfinite(s) and 1.0 + s > 0.0):
            self.refactor()
            g = self.inverse_M @ x
            s = float(x @ g)
            if not (math.isfinite(s) and 1.0 + s > 0.0):
                raise NumericError(f"rank-one denominator 1 + x^T M^-1 x = {1.0 + s!r} <= 0")
        self.matrix_M += np.outer(x, x)
        self.inverse_M -= np.outer(g, g) / (1.0 + s)
        self.logdet_M += math.log1p(s)
        self.updates_since_refactor += 1
        if self.updates_since_refactor >= self.refactor_every:
            self.refactor()
        return s / (1.0 + s)

    def inverse_residual(self) -> float:
        """Frobenius norm of ``M M^{-1} - I``."""
        return float(np.linalg.norm(self.matrix_M @ self.inverse_M - np.eye(self.dim)))


def rank_one_update(state: SpdState, x) -> tuple[SpdState, float]:
    quad = state.update(x)
    return state, quad


def _as_matrix(state_or_matrix) -> np.ndarray:
    if isinstance(state_or_matrix, SpdState):
        return state_or_matrix.matrix_M
    return np.asarray(state_or_matrix, dtype=float)


def quad_form(state, u, v) -> float:
    """``u^T M v``."""
    M = _as_matrix(state)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (M.shape[0],) or v.shape != (M.shape[0],):
        raise ValueError(f"vectors must have length {M.shape[0]}")
    return float(u @ M @ v)


def project_ball_M(state, u, radius_R: float, *, tol: float = PROJECTION_TOL,
                   max_iter: int = PROJECTION_MAX_ITER, return_info: bool = False):
    """Minimize ``(w - u)^T M (w - u)`` over ``||w|| <= R``.

    Outside the ball the minimizer is ``w(lam) = (M + lam I)^{-1} M u`` with
    the multiplier ``lam >= 0`` chosen so that ``||w(lam)|| = R``. The root
    is found by Newton's method on ``1/||w(lam)|| - 1/R`` (nearly linear in
    ``lam``), safeguarded by bisection on a maintained bracket.

    Returns ``w``, or ``(w, lam, iterations)`` when ``return_info`` is set.
    """
    M = _as_matrix(state)
    u = np.asarray(u, dtype=float)
    R = float(radius_R)
    if not R > 0:
        raise ValueError("radius_R must be positive")
    if u.shape != (M.shape[0],):
        raise ValueError(f"u must have length {M.shape[0]}")
    if np.linalg.norm(u) <= R:
        return (u.copy(), 0.0, 0) if return_info else u.copy()

    b = M @ u
    eye = np.eye(M.shape[0])
    lo, hi = 0.0, float(np.linalg.norm(b)) / R
    lam = 0.0
    for it in range(1, max_iter + 1):
        c, low = sla.cho_factor(M + lam * eye, lower=True)
        w = sla.cho_solve((c, low), b)
        nw = float(np.linalg.norm(w))
        if abs(nw - R) <= tol * R:
            if nw > R:
                w *= R / nw
            return (w, lam, it) if return_info else w
        if nw > R:
            lo = lam
        else:
            hi = lam
        z = sla.solve_triangular(c, w, lower=True)
        # d/dlam ||w|| = -w^T (M + lam I)^{-1} w / ||w||
        step = (nw - R) / R * nw**2 / float(z @ z)
        cand = lam + step
        lam = cand if lo < cand < hi else 0.5 * (lo + hi)
    raise ProjectionError(
        f"ball projection did not converge in {max_iter} iterations",
        float(np.linalg.cond(M)),
    )


def trace_lemma_check(state_before: SpdState, x, tolerance: float = LEMMA_TOL) -> VerifierRecord:
    """Check ``x^T M_new^{-1} x <= logdet(M_new) - logdet(M_old)``.

    The update is applied to a copy; ``state_before`` is left untouched.
    """
    st = state_before.copy()
    before = st.logdet_M
    quad = st.update(x)
    return VerifierRecord.check("trace_lemma", quad, st.logdet_M - before, tolerance)


def logdet_delta_bound_check(a: float, d: int, xs: Sequence, tolerance: float = LEMMA_TOL) -> VerifierRecord:
    """Check ``logdet(M_n) - logdet(a I) <= d log(1 + n / (a d))`` for ``M_n = aI + sum x x^T``."""
    st = SpdState.scaled_identity(d, a)
    start = st.logdet_M
    n = 0
    for x in xs:
        st.update(x)
        n += 1
    rhs = d * math.log1p(n / (a * d))
    return VerifierRecord.check("logdet_bound", st.logdet_M - start, rhs, tolerance)
