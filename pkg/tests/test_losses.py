import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expconcave.losses import (
    DomainError,
    LossKind,
    LossSpec,
    compute_constants,
    grid_alpha,
    loss_derivative,
    loss_value,
)

from conftest import random_ball


def test_logistic_at_zero(logistic):
    assert loss_value(logistic, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert loss_derivative(logistic, 0.0) == -0.5


def test_squared_at_one(squared):
    assert loss_value(squared, 1.0) == 0.0
    assert loss_derivative(squared, 1.0) == 0.0


def test_logistic_value_matches_extended_precision(logistic):
    mpmath.mp.dps = 50
    oracle = float(mpmath.log(1 + mpmath.e ** mpmath.mpf("0.5")))
    assert loss_value(logistic, -0.5) == pytest.approx(oracle, rel=1e-15)


def test_logistic_derivative_finite_difference(logistic):
    h = 1e-6
    fd = (loss_value(logistic, 0.3 + h) - loss_value(logistic, 0.3 - h)) / (2 * h)
    assert abs(fd - loss_derivative(logistic, 0.3)) <= 1e-8


def test_logistic_large_margin_no_overflow():
    spec = compute_constants("logistic", 700.0)
    assert loss_value(spec, -700.0) == pytest.approx(700.0)
    assert loss_value(spec, 700.0) == pytest.approx(math.exp(-700.0), rel=1e-12)
    assert loss_derivative(spec, -700.0) == pytest.approx(-1.0)
    assert loss_derivative(spec, 700.0) == pytest.approx(-math.exp(-700.0), rel=1e-12)


@pytest.mark.parametrize("fn", [loss_value, loss_derivative])
def test_domain_error_outside_ball(logistic, fn):
    fn(logistic, 1.0 + 5e-13)
    with pytest.raises(DomainError):
        fn(logistic, 1.0 + 1e-9)
    with pytest.raises(DomainError):
        fn(logistic, np.array([0.0, -1.5]))


def test_vectorized_matches_scalar(any_loss, rng):
    z = rng.uniform(-1, 1, 50)
    vals = loss_value(any_loss, z)
    assert isinstance(vals, np.ndarray)
    assert vals == pytest.approx([loss_value(any_loss, float(t)) for t in z], rel=0, abs=0)


def test_constants_logistic_r1():
    spec = compute_constants(LossKind.LOGISTIC, 1.0)
    # oracle: grid minimization of l''/l'^2 and direct evaluation of sup|l'|
    z = np.linspace(-1.0, 1.0, 100_001)
    sig = 1.0 / (1.0 + np.exp(-z))
    d1 = -(1.0 - sig)
    d2 = sig * (1.0 - sig)
    alpha_oracle = float(np.min(d2 / d1**2))
    G_oracle = float(np.max(np.abs(d1)))
    assert spec.alpha == pytest.approx(alpha_oracle, rel=1e-12)
    assert spec.lipschitz_G == pytest.approx(G_oracle, rel=1e-12)
    assert spec.alpha == pytest.approx(0.36788, abs=5e-6)
    assert spec.lipschitz_G == pytest.approx(0.73106, abs=5e-6)
    assert spec.beta == 0.5 * min(spec.alpha, 1.0 / (4.0 * spec.lipschitz_G))
    assert spec.beta == pytest.approx(0.170985, abs=1e-6)


def test_constants_squared_r1():
    spec = compute_constants(LossKind.SQUARED_MARGIN, 1.0)
    assert spec.alpha == 1.0 / 8.0
    assert spec.lipschitz_G == 4.0
    assert spec.beta == 1.0 / 32.0
    assert grid_alpha(LossKind.SQUARED_MARGIN, 1.0) == pytest.approx(1.0 / 8.0, rel=1e-12)


@pytest.mark.parametrize("kind", list(LossKind))
@pytest.mark.parametrize("R", [0.25, 1.0, 3.0])
def test_closed_form_alpha_matches_grid(kind, R):
    spec = compute_constants(kind, R)
    assert spec.alpha == pytest.approx(grid_alpha(kind, R), rel=1e-9)


def test_constants_deterministic():
    assert compute_constants("logistic", 1.7) == compute_constants("logistic", 1.7)


def test_lossspec_rejects_inconsistent_beta():
    with pytest.raises(ValueError):
        LossSpec(LossKind.LOGISTIC, 1.0, 0.3, 0.7, 0.2)
    with pytest.raises(ValueError):
        compute_constants("logistic", 0.0)
    with pytest.raises(ValueError):
        LossKind.parse("hinge")


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_exp_concavity_midpoint(any_loss, rng, R):
    spec = compute_constants(any_loss.kind, R)
    z1 = rng.uniform(-R, R, 10_000)
    z2 = rng.uniform(-R, R, 10_000)
    h = lambda z: np.exp(-spec.alpha * loss_value(spec, z))
    assert np.all(h(0.5 * (z1 + z2)) >= 0.5 * (h(z1) + h(z2)) - 1e-9)


def test_derivative_bounded_by_G(any_loss, rng):
    z = np.concatenate([rng.uniform(-1, 1, 1000), [-1.0, 1.0]])
    assert np.all(np.abs(loss_derivative(any_loss, z)) <= any_loss.lipschitz_G + 1e-12)


def test_derivative_consistency(any_loss, rng):
    z = rng.uniform(-1 + 1e-5, 1 - 1e-5, 1000)
    h = 1e-6
    fd = (loss_value(any_loss, z + h) - loss_value(any_loss, z - h)) / (2 * h)
    assert np.max(np.abs(fd - loss_derivative(any_loss, z))) <= 1e-7


def test_derivative_monotone(any_loss):
    z = np.linspace(-1, 1, 10_001)
    assert np.all(np.diff(loss_derivative(any_loss, z)) >= 0)
    assert abs(loss_derivative(any_loss, 0.0)) > 0


@pytest.mark.parametrize("d", [1, 3, 5])
def test_quadratic_lower_bound_composed(any_loss, rng, d):
    n = 10_000
    x = random_ball(rng, 1, d)[0]
    y = 1.0 if rng.random() < 0.5 else -1.0
    W = random_ball(rng, n, d)
    Wp = random_ball(rng, n, d)
    f = lambda w: loss_value(any_loss, y * (w @ x))
    grad = (y * loss_derivative(any_loss, y * (Wp @ x)))[:, None] * x
    inner = np.einsum("ij,ij->i", grad, W - Wp)
    lower = f(Wp) + inner + 0.5 * any_loss.beta * inner**2
    assert np.all(f(W) >= lower - 1e-9)


@settings(max_examples=200, deadline=None)
@given(
    kind=st.sampled_from(list(LossKind)),
    R=st.floats(0.05, 5.0),
    t1=st.floats(-1.0, 1.0),
    t2=st.floats(-1.0, 1.0),
)
def test_property_exp_concave_any_radius(kind, R, t1, t2):
    spec = compute_constants(kind, R)
    z1, z2 = R * t1, R * t2
    h = lambda z: math.exp(-spec.alpha * loss_value(spec, z))
    assert h(0.5 * (z1 + z2)) >= 0.5 * (h(z1) + h(z2)) - 1e-9
