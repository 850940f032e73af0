"""Monte Carlo estimators for population quantities of a data source."""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg as sla

from ..data import Dataset, LemmaOneSource, sample
from ..erm import ErmConfig, erm_solve
from ..losses import LossSpec, loss_derivative, loss_value
from .seeding import EVAL, PILOT, PROBES, REFERENCE, BOOTSTRAP, rng_for

THETA_RIDGE = 1e-9


class DegenerateFeaturesError(np.linalg.LinAlgError):
    pass


def evaluation_sample(source: LemmaOneSource, n_eval: int, seed: int) -> Dataset:
    """Evaluation draws, on a stream disjoint from all training cells."""
    return sample(source, n_eval, rng_for(seed, EVAL))


def estimate_population_risk(w, source: LemmaOneSource, loss: LossSpec, n_eval: int = 200_000,
                             seed: int = 0, eval_data: Dataset | None = None) -> tuple[float, float]:
    """Mean loss of ``w`` on fresh draws and its standard error."""
    if eval_data is None:
        if n_eval < 1000:
            raise ValueError("n_eval must be at least 1000")
        eval_data = evaluation_sample(source, n_eval, seed)
    vals = loss_value(loss, eval_data.y * (eval_data.X @ np.asarray(w, dtype=float)))
    n = len(vals)
    # constant losses give exactly zero, not rounding residue from the mean
    spread = n > 1 and float(np.ptp(vals)) > 0.0
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if spread else 0.0
    return float(np.mean(vals)), stderr


def reference_minimizer(source: LemmaOneSource, loss: LossSpec, n_ref: int, seed: int = 0,
                        grad_tol: float = 1e-11) -> np.ndarray:
    """High-accuracy ERM on a large dedicated sample, standing in for ``w*``."""
    data = sample(source, n_ref, rng_for(seed, REFERENCE))
    return erm_solve(data, loss, ErmConfig(loss.radius_R, grad_tol=grad_tol))


def default_probes(source: LemmaOneSource, loss: LossSpec, pilot: Dataset, seed: int,
                   n_boundary: int = 32) -> list[np.ndarray]:
    """Pilot ERM solution, the origin, and random points on the sphere of radius R."""
    R = loss.radius_R
    w_star = erm_solve(pilot, loss, ErmConfig(R, grad_tol=1e-9))
    g = rng_for(seed, PROBES).standard_normal((n_boundary, source.dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return [w_star, np.zeros(source.dim)] + [R * row for row in g]


def _min_generalized_eig(X: np.ndarray, y: np.ndarray, loss: LossSpec, probes, chol) -> float:
    n = len(y)
    best = np.inf
    for w in probes:
        weights = loss_derivative(loss, y * (X @ w)) ** 2
        A = (X * weights[:, None]).T @ X / n
        # eigenvalues of L^{-1} A L^{-T} with B = L L^T
        T = sla.solve_triangular(chol, A, lower=True)
        C = sla.solve_triangular(chol, T.T, lower=True)
        best = min(best, float(np.linalg.eigvalsh(0.5 * (C + C.T))[0]))
    return best


def _ridged_cholesky(X: np.ndarray) -> np.ndarray:
    B = X.T @ X / X.shape[0] + THETA_RIDGE * np.eye(X.shape[1])
    try:
        return np.linalg.cholesky(B)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFeaturesError("second-moment matrix is singular beyond regularization") from exc


def estimate_theta(source: LemmaOneSource, loss: LossSpec, probe_ws=None, n_est: int = 10_000,
                   seed: int = 0, data: Dataset | None = None) -> float:
    """Smallest ``theta`` with ``E[l'(y w.x)^2 x x^T] >= theta E[x x^T]`` over the probes.

    For each probe the largest feasible ``theta`` is the smallest generalized
    eigenvalue of the pair (weighted moment, plain moment); the minimum over
    probes is returned.
    """
    if data is None:
        data = sample(source, n_est, rng_for(seed, PILOT))
    if probe_ws is None:
        probe_ws = default_probes(source, loss, data, seed)
    chol = _ridged_cholesky(data.X)
    return _min_generalized_eig(data.X, data.y, loss, [np.asarray(p, float) for p in probe_ws], chol)


def theta_bootstrap(source: LemmaOneSource, loss: LossSpec, n_est: int = 10_000, seed: int = 0,
                    resamples: int = 32, probe_ws=None) -> tuple[float, float]:
    """``(theta_hat, bootstrap standard deviation)`` with probes held fixed."""
    data = sample(source, n_est, rng_for(seed, PILOT))
    if probe_ws is None:
        probe_ws = default_probes(source, loss, data, seed)
    probes = [np.asarray(p, float) for p in probe_ws]
    theta = _min_generalized_eig(data.X, data.y, loss, probes, _ridged_cholesky(data.X))
    rng = rng_for(seed, BOOTSTRAP)
    reps = []
    for _ in range(resamples):
        idx = rng.integers(0, len(data), len(data))
        Xb, yb = data.X[idx], data.y[idx]
        reps.append(_min_generalized_eig(Xb, yb, loss, probes, _ridged_cholesky(Xb)))
    return theta, float(np.std(reps, ddof=1))


def estimate_rho(w, reference_w, source: LemmaOneSource, n_est: int = 100_000,
                 radius_R: float = 1.0, seed: int = 0) -> float:
    """``sqrt(E[(x.(w - w_ref))^2]) / (2R)``, clipped to ``[0, 1]``."""
    diff = np.asarray(w, dtype=float) - np.asarray(reference_w, dtype=float)
    X = sample(source, n_est, rng_for(seed, EVAL, 1)).X
    val = math.sqrt(float(np.mean((X @ diff) ** 2))) / (2.0 * radius_R)
    return min(max(val, 0.0), 1.0)
