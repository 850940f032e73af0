"""Online Newton variant preconditioned by the raw feature covariance.

Each step updates ``M_i = M_{i-1} + x_i x_i^T`` and then solves

    w_{i+1} = argmin_{||w|| <= R}  eta_i <w, v_i> + 1/2 ||w - w_i||^2_{Z_i}

with ``Z_i = M_i / i`` and ``eta_i = eta1 / i``. The factors of ``i``
cancel, so the unconstrained minimizer is ``w_i - eta1 M_i^{-1} v_i`` and
the constrained one is its projection onto the ball in the ``M_i`` norm.
The learner's output is the average of ``w_1 .. w_n``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .linalg import REFACTOR_EVERY, SpdState, project_ball_M
from .losses import LossSpec, loss_derivative, loss_value


@dataclass(frozen=True)
class OnsConfig:
    eta1: float
    smoothing_a: float
    radius_R: float
    theta: float
    literal_gradient: bool = False

    def __post_init__(self):
        if not (self.eta1 > 0 and self.smoothing_a > 0 and self.radius_R > 0 and self.theta > 0):
            raise ValueError("eta1, smoothing_a, radius_R and theta must be positive")

    @classmethod
    def defaults(cls, loss: LossSpec, dim: int, theta: float, *, eta1: float | None = None,
                 smoothing_a: float | None = None, literal_gradient: bool = False) -> "OnsConfig":
        """``eta1 = max(1, 3/(theta beta))`` and ``a = eta1^2 G^2 d / (4 R^2)`` unless overridden."""
        R = loss.radius_R
        if eta1 is None:
            eta1 = max(1.0, 3.0 / (theta * loss.beta))
        if smoothing_a is None:
            smoothing_a = eta1**2 * loss.lipschitz_G**2 * dim / (4.0 * R**2)
        return cls(float(eta1), float(smoothing_a), R, float(theta), literal_gradient)


@dataclass
class LearnerState:
    iterate_w: np.ndarray
    spd: SpdState
    # 1-based index of the next example; spd has seen step_index - 1 updates
    step_index: int = 1
    sum_w: np.ndarray = None
    cumulative_loss: float = 0.0
    trace: list | None = field(default=None, repr=False)

    @property
    def steps_taken(self) -> int:
        return self.step_index - 1


class EmptyRunError(ValueError):
    pass


def ons_init(config: OnsConfig, dim: int, keep_trace: bool = False) -> LearnerState:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return LearnerState(
        iterate_w=np.zeros(dim),
        spd=SpdState.scaled_identity(dim, config.smoothing_a),
        sum_w=np.zeros(dim),
        trace=[] if keep_trace else None,
    )


def gradient(loss: LossSpec, w, x, y, literal: bool = False) -> np.ndarray:
    """``y l'(y w.x) x``; the literal variant drops the factor ``y``."""
    m = y * float(np.dot(w, x))
    dl = loss_derivative(loss, m)
    return (dl if literal else y * dl) * np.asarray(x, dtype=float)


def ons_step(state: LearnerState, config: OnsConfig, loss: LossSpec, x, y) -> LearnerState:
    x = np.asarray(x, dtype=float)
    w = state.iterate_w
    m = y * float(w @ x)
    cur_loss = loss_value(loss, m)

    quad = state.spd.update(x)
    v = gradient(loss, w, x, y, config.literal_gradient)
    u = w - config.eta1 * (state.spd.inverse_M @ v)
    w_next = project_ball_M(state.spd, u, config.radius_R)

    if state.trace is not None:
        state.trace.append((state.step_index, cur_loss, float(np.linalg.norm(w)), quad, state.spd.logdet_M))
    state.sum_w += w
    state.cumulative_loss += cur_loss
    state.iterate_w = w_next
    state.step_index += 1
    return state


def ons_average(state) -> np.ndarray:
    n = state.step_index - 1
    if n < 1:
        raise EmptyRunError("no steps taken")
    return state.sum_w / n


@dataclass
class OgdState:
    iterate_w: np.ndarray
    step_index: int = 1
    sum_w: np.ndarray = None
    cumulative_loss: float = 0.0

    @classmethod
    def zeros(cls, dim: int) -> "OgdState":
        return cls(np.zeros(dim), 1, np.zeros(dim), 0.0)


def ogd_init(dim: int) -> OgdState:
    return OgdState.zeros(dim)


def ogd_baseline_step(state: OgdState, loss: LossSpec, x, y, step_c: float,
                      literal: bool = False) -> OgdState:
    """``w <- Proj_R(w - step_c / sqrt(i) * v)``, Euclidean projection."""
    if not step_c > 0:
        raise ValueError("step_c must be positive")
    w = state.iterate_w
    x = np.asarray(x, dtype=float)
    cur_loss = loss_value(loss, y * float(w @ x))
    v = gradient(loss, w, x, y, literal)
    u = w - (step_c / math.sqrt(state.step_index)) * v
    nu = float(np.linalg.norm(u))
    if nu > loss.radius_R:
        u = u * (loss.radius_R / nu)
    state.sum_w += w
    state.cumulative_loss += cur_loss
    state.iterate_w = u
    state.step_index += 1
    return state


def default_step_c(loss: LossSpec) -> float:
    """Diameter over gradient bound, ``2R / G``."""
    return 2.0 * loss.radius_R / loss.lipschitz_G


def regret_of_run(losses, comparator_w, X, y, loss: LossSpec) -> float:
    """``sum_i l(y_i w_i.x_i) - sum_i l(y_i c.x_i)`` for logged per-step losses."""
    losses = np.asarray(losses, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if losses.ndim != 1 or len(losses) < 1:
        raise ValueError("need at least one logged loss")
    if X.shape[0] != len(losses) or y.shape != losses.shape:
        raise ValueError(f"length mismatch: {len(losses)} losses vs {X.shape[0]} examples")
    comp = loss_value(loss, y * (X @ np.asarray(comparator_w, dtype=float)))
    return float(np.sum(losses) - np.sum(comp))


@dataclass
class RunResult:
    """Output of a full pass of an online learner over a dataset."""

    average: np.ndarray
    iterates: np.ndarray
    losses: np.ndarray
    final_w: np.ndarray
    quads: np.ndarray | None = None
    logdets: np.ndarray | None = None

    def regret(self, comparator_w, X, y, loss: LossSpec) -> float:
        return regret_of_run(self.losses, comparator_w, X, y, loss)

    def prefix_regret(self, comparator_w, X, y, loss: LossSpec) -> np.ndarray:
        """Cumulative regret after each step."""
        comp = loss_value(loss, np.asarray(y) * (np.asarray(X) @ np.asarray(comparator_w)))
        return np.cumsum(self.losses - comp)

    def write_trace(self, path) -> None:
        if self.quads is None:
            raise ValueError("trace columns quad/logdet are only recorded for ONS runs")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "loss", "w_norm", "quad", "logdet"])
            norms = np.linalg.norm(self.iterates, axis=1)
            for i in range(len(self.losses)):
                w.writerow([i + 1, repr(float(self.losses[i])), repr(float(norms[i])),
                            repr(float(self.quads[i])), repr(float(self.logdets[i]))])


def _prepare(X, y):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) and y must be (n,)")
    if X.shape[0] < 1:
        raise EmptyRunError("no examples")
    return X, y


def run_ons(X, y, loss: LossSpec, config: OnsConfig, backend=None) -> RunResult:
    """Full pass of :func:`ons_step` over ``(X, y)`` through the kernel backend."""
    X, y = _prepare(X, y)
    k = backend or kernels
    its, losses, quads, logdets, w_next, *_ = k.ons_run(
        X, y, loss.kind.code, config.radius_R, config.eta1, config.smoothing_a,
        bool(config.literal_gradient), REFACTOR_EVERY,
    )
    return RunResult(its.mean(axis=0), its, losses, w_next, quads, logdets)


def run_ogd(X, y, loss: LossSpec, step_c: float | None = None, literal: bool = False,
            backend=None) -> RunResult:
    X, y = _prepare(X, y)
    if step_c is None:
        step_c = default_step_c(loss)
    k = backend or kernels
    its, losses, w_next = k.ogd_run(X, y, loss.kind.code, loss.radius_R, float(step_c), bool(literal))
    return RunResult(its.mean(axis=0), its, losses, w_next)
