"""Randomized numeric checks of the inequalities the analysis relies on.

Each suite returns a single :class:`VerifierRecord` describing its worst
trial; the record passes iff every trial passed.
"""
from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..data import LemmaOneSource, uniform_ball
from ..losses import LossKind, LossSpec, compute_constants, loss_derivative, loss_value
from ..records import VerifierRecord
from .estimators import theta_bootstrap
from .seeding import VERIFY, rng_for

TOL = 1e-9
A_CHOICES = (0.1, 1.0, 10.0)


def _worst(name: str, lhs: np.ndarray, rhs: np.ndarray, tol: float) -> VerifierRecord:
    k = int(np.argmax(lhs - rhs))
    return VerifierRecord.check(name, lhs[k], rhs[k], tol)


def _sequence(rng, d, a, n):
    X = np.ascontiguousarray(uniform_ball(rng, n, d))
    M = a * np.eye(d)
    Minv = np.eye(d) / a
    quads, logdets, _ = kernels.rank_one_sequence(M, Minv, d * math.log(a), X)
    return quads, logdets


def trace_lemma_suite(trials: int, seed: int = 0, max_dim: int = 6) -> VerifierRecord:
    """``x^T M_i^{-1} x <= logdet M_i - logdet M_{i-1}`` on ``trials`` random (history, x) pairs."""
    rng = rng_for(seed, VERIFY, 2)
    lhs, rhs = [], []
    done = 0
    while done < trials:
        n = int(min(trials - done, rng.integers(1, 65)))
        d = int(rng.integers(1, max_dim + 1))
        a = float(rng.choice(A_CHOICES))
        quads, logdets = _sequence(rng, d, a, n)
        prev = np.concatenate([[d * math.log(a)], logdets[:-1]])
        lhs.append(quads)
        rhs.append(logdets - prev)
        done += n
    return _worst("trace_lemma", np.concatenate(lhs), np.concatenate(rhs), TOL)


def logdet_bound_suite(trials: int, seed: int = 0, max_dim: int = 8) -> VerifierRecord:
    """``logdet M_n - logdet(aI) <= d log(1 + n/(a d))`` on ``trials`` random sequences."""
    rng = rng_for(seed, VERIFY, 3)
    lhs = np.empty(trials)
    rhs = np.empty(trials)
    for t in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        a = float(rng.choice((0.5,) + A_CHOICES))
        n = int(rng.integers(0, 129))
        if n:
            # unit vectors push the bound hardest
            X = rng.standard_normal((n, d))
            X /= np.linalg.norm(X, axis=1, keepdims=True)
            _, logdets, _ = kernels.rank_one_sequence(a * np.eye(d), np.eye(d) / a, d * math.log(a),
                                                   np.ascontiguousarray(X))
            lhs[t] = logdets[-1] - d * math.log(a)
        else:
            lhs[t] = 0.0
        rhs[t] = d * math.log1p(n / (a * d))
    return _worst("logdet_growth_bound", lhs, rhs, TOL)


def _ball_points(rng, n, d, R):
    pts = R * uniform_ball(rng, n, d)
    # a third of the points on the sphere, where the bound is tightest
    k = n // 3
    pts[:k] /= np.maximum(np.linalg.norm(pts[:k], axis=1, keepdims=True), 1e-300)
    pts[:k] *= R
    return pts


def quadratic_lower_bound_suite(loss: LossSpec, trials: int, seed: int = 0,
                                max_dim: int = 5) -> VerifierRecord:
    """``f(w) >= f(w') + g.(w - w') + beta/2 (g.(w - w'))^2`` with ``f(w) = l(y w.x)``, ``g = grad f(w')``."""
    rng = rng_for(seed, VERIFY, 4, loss.kind.code)
    R = loss.radius_R
    lhs_all, rhs_all = [], []
    sizes = np.bincount(rng.integers(1, max_dim + 1, trials), minlength=max_dim + 1)
    for d in range(1, max_dim + 1):
        n = int(sizes[d])
        if not n:
            continue
        X = uniform_ball(rng, n, d)
        k = n // 2
        X[:k] /= np.maximum(np.linalg.norm(X[:k], axis=1, keepdims=True), 1e-300)
        y = rng.choice([-1.0, 1.0], n)
        W = _ball_points(rng, n, d, R)
        Wp = _ball_points(rng, n, d, R)
        # a slice of antipodal pairs
        Wp[: n // 5] = -W[: n // 5]
        mp = y * np.einsum("ij,ij->i", Wp, X)
        m = y * np.einsum("ij,ij->i", W, X)
        # grad f(w').(w - w') = y l'(m') x.(w - w') = l'(m') (m - m')
        inner = loss_derivative(loss, mp) * (m - mp)
        lhs_all.append(loss_value(loss, mp) + inner + 0.5 * loss.beta * inner**2)
        rhs_all.append(loss_value(loss, m))
    return _worst(f"quadratic_lower_bound[{loss.kind.value}]", np.concatenate(lhs_all),
                  np.concatenate(rhs_all), TOL)


def exp_concavity_suite(loss: LossSpec, trials: int, seed: int = 0) -> VerifierRecord:
    """Midpoint concavity of ``exp(-alpha l)`` on random pairs in ``[-R, R]``."""
    rng = rng_for(seed, VERIFY, 5, loss.kind.code)
    R = loss.radius_R
    z1 = rng.uniform(-R, R, trials)
    z2 = rng.uniform(-R, R, trials)
    h = lambda z: np.exp(-loss.alpha * loss_value(loss, z))
    return _worst(f"exp_concavity[{loss.kind.value}]", 0.5 * (h(z1) + h(z2)), h(0.5 * (z1 + z2)), TOL)


def lemma_one_check(q: float, seed: int = 0, n_est: int = 10_000, dim: int = 5,
                    kind=LossKind.LOGISTIC, radius_R: float = 1.0) -> VerifierRecord:
    """``theta_hat >= q l'(0)^2 - 3 sigma_boot`` on a source with label floor ``q``."""
    loss = compute_constants(kind, radius_R)
    source = LemmaOneSource.default(dim, q, radius_R, seed)
    theta, sigma = theta_bootstrap(source, loss, n_est=n_est, seed=seed)
    floor = q * loss_derivative(loss, 0.0) ** 2
    return VerifierRecord.check(f"theta_label_floor[q={q}]", floor - 3.0 * sigma, theta, 0.0)


def verify_all_lemmas(seed: int = 0, trials: int = 10_000) -> list[VerifierRecord]:
    """Run every registered suite with ``trials`` randomized instances each."""
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0:
        return []
    records = [
        trace_lemma_suite(trials, seed),
        logdet_bound_suite(trials, seed),
    ]
    for kind in LossKind:
        loss = compute_constants(kind, 1.0)
        records.append(quadratic_lower_bound_suite(loss, trials, seed))
        records.append(exp_concavity_suite(loss, trials, seed))
    for q in (0.1, 0.25, 0.5):
        records.append(lemma_one_check(q, seed))
    return records
