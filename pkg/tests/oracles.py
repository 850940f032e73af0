"""Independent reference computations used by the tests.

None of these share code paths with the package under test beyond the
loss functions themselves.
"""
import numpy as np
from scipy import optimize


def grid_projection_2d(M, u, R, points=4001, chunk=400):
    """Brute-force argmin of (w-u)^T M (w-u) over ||w|| <= R via a grid on [-1,1]^2, then local refinement."""
    M = np.asarray(M, float)
    u = np.asarray(u, float)
    g = np.linspace(-1.0, 1.0, points)
    h = g[1] - g[0]
    best, arg = np.inf, None
    for s in range(0, points, chunk):
        gx = g[s:s + chunk, None]
        gy = g[None, :]
        dx, dy = gx - u[0], gy - u[1]
        obj = M[0, 0] * dx * dx + 2 * M[0, 1] * dx * dy + M[1, 1] * dy * dy
        obj[gx**2 + gy**2 > R * R] = np.inf
        k = np.unravel_index(np.argmin(obj), obj.shape)
        if obj[k] < best:
            best, arg = obj[k], np.array([g[s + k[0]], g[k[1]]])

    def f(w):
        d = w - u
        return float(d @ M @ d)

    if np.linalg.norm(arg) > R - 3 * h:
        # boundary optimum: 1-D search over the angle
        t0 = np.arctan2(arg[1], arg[0])
        res = optimize.minimize_scalar(
            lambda t: f(R * np.array([np.cos(t), np.sin(t)])),
            bounds=(t0 - 0.05, t0 + 0.05), method="bounded", options={"xatol": 1e-14},
        )
        cand = R * np.array([np.cos(res.x), np.sin(res.x)])
        if np.linalg.norm(u) > R or f(cand) <= f(u):
            return cand
    res = optimize.minimize(f, arg, method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-16})
    return res.x


def generic_ons_update(w, v, eta, Z, R):
    """argmin_{||w'|| <= R} eta <w', v> + 1/2 (w'-w)^T Z (w'-w) by SLSQP on the materialized problem."""
    w = np.asarray(w, float)

    def obj(z):
        d = z - w
        return eta * float(z @ v) + 0.5 * float(d @ Z @ d)

    def jac(z):
        return eta * v + Z @ (z - w)

    cons = {"type": "ineq", "fun": lambda z: R * R - float(z @ z), "jac": lambda z: -2 * z}
    start = w if np.linalg.norm(w) < R else 0.5 * w
    res = optimize.minimize(obj, start, jac=jac, constraints=[cons], method="SLSQP",
                            options={"ftol": 1e-16, "maxiter": 1000})
    return res.x


def generic_erm(X, y, value, grad, R):
    """Ball-constrained empirical risk by SLSQP with analytic gradient."""
    n, d = X.shape

    def obj(w):
        return float(np.mean(value(y * (X @ w))))

    def jac(w):
        return X.T @ (y * grad(y * (X @ w))) / n

    cons = {"type": "ineq", "fun": lambda w: R * R - float(w @ w), "jac": lambda w: -2 * w}
    res = optimize.minimize(obj, np.zeros(d), jac=jac, constraints=[cons], method="SLSQP",
                            options={"ftol": 1e-15, "maxiter": 2000})
    return res.x, res.fun


def random_spd(rng, d, lo=0.1, hi=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (Q * rng.uniform(lo, hi, d)) @ Q.T
