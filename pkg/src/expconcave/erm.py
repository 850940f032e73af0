"""Empirical risk minimization over the ball ``||w|| <= R``.

Projected gradient descent with Armijo backtracking, started at the origin.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .losses import LossKind, LossSpec, loss_derivative, loss_value

ARMIJO = 1e-4


class ErmConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ErmConfig:
    radius_R: float
    grad_tol: float = 1e-9
    max_iters: int = 100_000

    def __post_init__(self):
        if not (self.radius_R > 0 and self.grad_tol > 0 and self.max_iters >= 1):
            raise ValueError("need radius_R > 0, grad_tol > 0 and max_iters >= 1")


@dataclass
class ErmResult:
    w: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    converged: bool
    history: list


def project_ball(w: np.ndarray, R: float) -> np.ndarray:
    nw = float(np.linalg.norm(w))
    return w * (R / nw) if nw > R else w


def empirical_risk(dataset, loss: LossSpec, w) -> float:
    X, y = dataset.X, dataset.y
    return float(np.mean(loss_value(loss, y * (X @ np.asarray(w, dtype=float)))))


def empirical_gradient(dataset, loss: LossSpec, w) -> np.ndarray:
    X, y = dataset.X, dataset.y
    dl = loss_derivative(loss, y * (X @ w))
    return X.T @ (y * dl) / len(y)


def projected_gradient_norm(dataset, loss: LossSpec, w, R: float) -> float:
    g = empirical_gradient(dataset, loss, w)
    return float(np.linalg.norm(w - project_ball(w - g, R)))


def _smoothness_bound(dataset, loss: LossSpec) -> float:
    curv = 2.0 if loss.kind is LossKind.SQUARED_MARGIN else 0.25
    top = float(np.linalg.norm(dataset.X, 2)) ** 2 / len(dataset.y)
    return max(curv * top, 1e-300)


def erm_solve(dataset, loss: LossSpec, config: ErmConfig | None = None, *, full_output: bool = False):
    """Minimize the average loss over the ball.

    Stops once ``||w - Proj(w - grad)|| <= grad_tol``. On hitting
    ``max_iters`` an :class:`ErmConvergenceWarning` is issued and the best
    iterate is returned (``converged=False`` in the full output).
    """
    if config is None:
        config = ErmConfig(loss.radius_R)
    if len(dataset) < 1:
        raise ValueError("empty dataset")
    R = config.radius_R
    lip = _smoothness_bound(dataset, loss)
    t_min = 1.0 / lip
    w = np.zeros(dataset.dim)
    f = empirical_risk(dataset, loss, w)
    history = [f]
    best_w, best_f = w, f
    it = 0
    pg = np.inf
    converged = False
    w_prev = g_prev = None
    for it in range(config.max_iters + 1):
        g = empirical_gradient(dataset, loss, w)
        pg = float(np.linalg.norm(w - project_ball(w - g, R)))
        if pg <= config.grad_tol:
            converged = True
            break
        if it == config.max_iters:
            break
        # Barzilai-Borwein trial step; doubling the previous step instead
        # settles near 2/L where projected gradient stalls
        t = t_min
        if w_prev is not None:
            s, yv = w - w_prev, g - g_prev
            sy = float(s @ yv)
            if sy > 0.0:
                t = min(max(float(s @ s) / sy, t_min), 1e6 * t_min)
        while True:
            w_new = project_ball(w - t * g, R)
            f_new = empirical_risk(dataset, loss, w_new)
            # below 1/L the descent lemma guarantees decrease; rounding aside
            if f_new <= f + ARMIJO * float(g @ (w_new - w)) or t <= t_min:
                break
            t = max(0.5 * t, t_min)
        w_prev, g_prev = w, g
        w, f = w_new, f_new
        history.append(f)
        if f < best_f:
            best_w, best_f = w, f
    if not converged:
        w, f = best_w, best_f
        warnings.warn(
            f"ERM did not reach grad_tol={config.grad_tol} in {config.max_iters} iterations "
            f"(projected gradient {pg:.3e})",
            ErmConvergenceWarning,
            stacklevel=2,
        )
    if full_output:
        return ErmResult(w, f, pg, it, converged, history)
    return w
