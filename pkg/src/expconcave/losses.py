"""Exp-concave margin losses and their curvature constants.

Losses act on the margin ``z = y * w.x``. Because ``||x|| <= 1`` and the
hypothesis lives in the ball of radius ``R``, every margin lies in
``[-R, R]``; the constants ``alpha``, ``G`` and ``beta`` are computed on
that interval.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

DOMAIN_TOL = 1e-12


class DomainError(ValueError):
    """A margin fell outside ``[-R, R]``.

    Usually means a hypothesis outside the ball or un-normalized features.
    """


class LossKind(enum.Enum):
    SQUARED_MARGIN = "squared"
    LOGISTIC = "logistic"

    @classmethod
    def parse(cls, value: "LossKind | str") -> "LossKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown loss kind {value!r}")

    @property
    def code(self) -> int:
        # integer tag understood by the compiled kernels
        return 0 if self is LossKind.SQUARED_MARGIN else 1


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind
    radius_R: float
    alpha: float
    lipschitz_G: float
    beta: float

    def __post_init__(self):
        if not (self.radius_R > 0 and self.alpha > 0 and self.lipschitz_G > 0):
            raise ValueError("radius_R, alpha and lipschitz_G must be positive")
        expected = curvature_beta(self.alpha, self.lipschitz_G, self.radius_R)
        if self.beta != expected:
            raise ValueError(f"beta must equal 1/2 min(alpha, 1/(4GR)) = {expected}")

    def value(self, z):
        return loss_value(self, z)

    def derivative(self, z):
        return loss_derivative(self, z)

    def second_derivative(self, z):
        return _raw_second_derivative(self.kind, np.asarray(z, dtype=float))


def curvature_beta(alpha: float, lipschitz_G: float, radius_R: float) -> float:
    return 0.5 * min(alpha, 1.0 / (4.0 * lipschitz_G * radius_R))


def _check_domain(spec: LossSpec, z: np.ndarray) -> None:
    limit = spec.radius_R + DOMAIN_TOL
    if z.size and not np.all(np.abs(z) <= limit):
        worst = float(np.max(np.abs(z)))
        raise DomainError(
            f"margin |z|={worst!r} exceeds radius R={spec.radius_R!r}; "
            "hypothesis outside the ball or features with norm > 1"
        )


def _raw_value(kind: LossKind, z: np.ndarray) -> np.ndarray:
    if kind is LossKind.SQUARED_MARGIN:
        return (1.0 - z) ** 2
    # log(1 + exp(-z)) without overflow for either sign of z
    return np.logaddexp(0.0, -z)


def _raw_derivative(kind: LossKind, z: np.ndarray) -> np.ndarray:
    if kind is LossKind.SQUARED_MARGIN:
        return -2.0 * (1.0 - z)
    # -1 / (1 + e^z) == -sigmoid(-z)
    return -np.exp(-np.logaddexp(0.0, z))


def _raw_second_derivative(kind: LossKind, z: np.ndarray) -> np.ndarray:
    if kind is LossKind.SQUARED_MARGIN:
        return np.full_like(z, 2.0)
    s = np.exp(-np.logaddexp(0.0, -z))
    return s * (1.0 - s)


def _scalar_or_array(z_in, out: np.ndarray):
    return float(out) if np.ndim(z_in) == 0 else out


def loss_value(spec: LossSpec, z):
    """Loss at margin(s) ``z``; scalars in, scalars out."""
    arr = np.asarray(z, dtype=float)
    _check_domain(spec, arr)
    return _scalar_or_array(z, _raw_value(spec.kind, arr))


def loss_derivative(spec: LossSpec, z):
    arr = np.asarray(z, dtype=float)
    _check_domain(spec, arr)
    return _scalar_or_array(z, _raw_derivative(spec.kind, arr))


def grid_alpha(kind: LossKind | str, radius_R: float, points: int = 100_000) -> float:
    """Minimum of l''/l'^2 over a dense grid on ``[-R, R]``.

    Generic route for losses without a closed form; used to cross-check the
    analytic constants.
    """
    kind = LossKind.parse(kind)
    z = np.linspace(-radius_R, radius_R, points)
    d1 = _raw_derivative(kind, z)
    d2 = _raw_second_derivative(kind, z)
    with np.errstate(divide="ignore"):
        ratio = np.where(d1 != 0.0, d2 / d1**2, np.inf)
    return float(np.min(ratio))


def compute_constants(kind: LossKind | str, radius_R: float) -> LossSpec:
    """Build the :class:`LossSpec` for ``kind`` on the ball of radius ``radius_R``.

    ``alpha`` is the infimum of ``l''(z) / l'(z)^2`` over ``[-R, R]``, a
    sufficient condition for ``exp(-alpha * l)`` to be concave there. ``G``
    bounds ``|l'|`` on the same interval.
    """
    kind = LossKind.parse(kind)
    R = float(radius_R)
    if not R > 0:
        raise ValueError("radius_R must be positive")
    if kind is LossKind.LOGISTIC:
        # l''/l'^2 = e^z, increasing in z
        alpha = float(np.exp(-R))
        G = float(1.0 / (1.0 + np.exp(-R)))
    else:
        # l''/l'^2 = 1/(2(1-z)^2), smallest at z = -R
        alpha = 1.0 / (2.0 * (1.0 + R) ** 2)
        G = 2.0 * (1.0 + R)
    return LossSpec(kind, R, alpha, G, curvature_beta(alpha, G, R))
