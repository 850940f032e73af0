import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expconcave.linalg import (
    NumericError,
    ProjectionError,
    SpdState,
    logdet_delta_bound_check,
    project_ball_M,
    quad_form,
    rank_one_update,
    trace_lemma_check,
)

from conftest import random_ball
from oracles import grid_projection_2d, random_spd


def test_rank_one_update_diagonal():
    st_ = SpdState.scaled_identity(2, 1.0)
    st_, quad = rank_one_update(st_, [1.0, 0.0])
    np.testing.assert_array_equal(st_.matrix_M, [[2, 0], [0, 1]])
    np.testing.assert_allclose(st_.inverse_M, [[0.5, 0], [0, 1]], atol=1e-15)
    assert st_.logdet_M == pytest.approx(math.log(2.0), abs=1e-15)
    assert quad == pytest.approx(0.5, abs=1e-15)


def test_rank_one_update_zero_vector():
    st_ = SpdState.scaled_identity(2, 1.0)
    st_, quad = rank_one_update(st_, np.zeros(2))
    np.testing.assert_array_equal(st_.matrix_M, np.eye(2))
    np.testing.assert_array_equal(st_.inverse_M, np.eye(2))
    assert st_.logdet_M == 0.0
    assert quad == 0.0


def test_rank_one_sequence_matches_direct(rng):
    st_ = SpdState.scaled_identity(3, 1.0)
    X = random_ball(rng, 100, 3)
    for x in X:
        st_.update(x)
    M = np.eye(3) + X.T @ X
    inv = np.linalg.inv(M)
    assert np.linalg.norm(st_.inverse_M - inv) / np.linalg.norm(inv) <= 1e-8
    sign, ld = np.linalg.slogdet(M)
    assert sign == 1 and abs(st_.logdet_M - ld) <= 1e-8
    np.testing.assert_allclose(st_.matrix_M, M, rtol=1e-13)


def test_update_rejects_wrong_length():
    with pytest.raises(ValueError):
        SpdState.scaled_identity(2, 1.0).update([1.0, 0.0, 0.0])


def test_corrupted_inverse_triggers_refactor():
    st_ = SpdState.scaled_identity(2, 1.0)
    st_.inverse_M = -np.eye(2)  # garbage; 1 + x^T Minv x = 0
    quad = st_.update([1.0, 0.0])
    assert quad == pytest.approx(0.5)
    np.testing.assert_allclose(st_.inverse_M, [[0.5, 0], [0, 1]], atol=1e-14)


def test_non_spd_matrix_is_hard_failure():
    st_ = SpdState.scaled_identity(2, 1.0)
    st_.matrix_M = -np.eye(2)
    st_.inverse_M = -np.eye(2)
    with pytest.raises(NumericError):
        st_.update([1.0, 0.0])


@pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
def test_inverse_drift_long_run(rng, a):
    d = 8
    st_ = SpdState.scaled_identity(d, a)
    for x in random_ball(rng, 10_000, d):
        st_.update(x)
    assert st_.inverse_residual() <= 1e-6
    assert abs(st_.logdet_M - np.linalg.slogdet(st_.matrix_M)[1]) <= 1e-6
    assert np.linalg.eigvalsh(st_.matrix_M)[0] >= a - 1e-9


def test_refactor_schedule():
    st_ = SpdState.scaled_identity(2, 1.0, refactor_every=4)
    for k in range(1, 10):
        st_.update([0.1, 0.2])
        assert st_.updates_since_refactor == k % 4


def test_quad_form_examples():
    I = SpdState.scaled_identity(2, 1.0)
    assert quad_form(I, [3, 4], [3, 4]) == 25.0
    assert quad_form(np.diag([2.0, 1.0]), [1, 0], [0, 1]) == 0.0
    with pytest.raises(ValueError):
        quad_form(I, [1, 2, 3], [1, 2])


def test_quad_form_naive_loop(rng):
    M = random_spd(rng, 4)
    u, v = rng.standard_normal(4), rng.standard_normal(4)
    naive = 0.0
    for i in range(4):
        for j in range(4):
            naive += u[i] * M[i, j] * v[j]
    assert quad_form(M, u, v) == pytest.approx(naive, rel=1e-13)


def test_project_euclidean():
    np.testing.assert_allclose(project_ball_M(np.eye(2), [2.0, 0.0], 1.0), [1.0, 0.0], atol=1e-10)


def test_project_axis_symmetric():
    np.testing.assert_allclose(project_ball_M(np.diag([4.0, 1.0]), [2.0, 0.0], 1.0), [1.0, 0.0], atol=1e-10)


def test_project_matches_grid_oracle():
    M = np.diag([4.0, 1.0])
    u = np.array([1.0, 1.0])
    w = project_ball_M(M, u, 1.0)
    np.testing.assert_allclose(w, grid_projection_2d(M, u, 1.0), atol=1e-4)


def test_project_accepts_state():
    st_ = SpdState(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(project_ball_M(st_, [1.0, 1.0], 1.0),
                               project_ball_M(np.diag([4.0, 1.0]), [1.0, 1.0], 1.0))


def test_project_feasible_point_unchanged(rng):
    M = random_spd(rng, 4)
    u = random_ball(rng, 1, 4, 0.9)[0]
    w, lam, it = project_ball_M(M, u, 1.0, return_info=True)
    np.testing.assert_array_equal(w, u)
    assert lam == 0.0 and it == 0


def test_project_idempotent(rng):
    M = random_spd(rng, 3)
    w = project_ball_M(M, 5 * rng.standard_normal(3), 1.0)
    np.testing.assert_allclose(project_ball_M(M, w, 1.0), w, atol=1e-12)


def test_projection_convergence_failure_reports_condition():
    with pytest.raises(ProjectionError) as info:
        project_ball_M(np.diag([1e6, 1e-6]), [5.0, 5.0], 1.0, max_iter=1)
    assert info.value.condition > 1e11


def _objective(M, u, w):
    d = w - u
    return float(d @ M @ d)


@pytest.mark.parametrize("d", [2, 4, 8])
def test_project_optimality_under_perturbation(rng, d):
    for _ in range(10):
        M = random_spd(rng, d, 0.05, 20.0)
        R = rng.uniform(0.3, 2.0)
        u = rng.standard_normal(d) * 3
        w = project_ball_M(M, u, R)
        assert np.linalg.norm(w) <= R * (1 + 1e-9)
        fw = _objective(M, u, w)
        checked = 0
        while checked < 100:
            delta = rng.standard_normal(d)
            delta *= 1e-4 / np.linalg.norm(delta)
            if np.linalg.norm(w + delta) > R:
                continue
            assert fw <= _objective(M, u, w + delta) + 1e-7
            checked += 1


@pytest.mark.parametrize("d", [1, 3, 8])
def test_project_kkt_residual(rng, d):
    for _ in range(20):
        M = random_spd(rng, d)
        u = rng.standard_normal(d) * 4
        R = 1.0
        w = project_ball_M(M, u, R)
        if np.linalg.norm(u) <= R:
            continue
        g = M @ (w - u)
        lam = -float(g @ w) / R**2
        assert lam >= -1e-9
        assert np.linalg.norm(g + lam * w) <= 1e-7


def test_trace_lemma_examples():
    rec = trace_lemma_check(SpdState.scaled_identity(2, 1.0), [1.0, 0.0])
    assert rec.lhs == pytest.approx(0.5) and rec.rhs == pytest.approx(math.log(2)) and rec.passed
    rec = trace_lemma_check(SpdState.scaled_identity(2, 1.0), [0.0, 0.0])
    assert rec.lhs == 0.0 and rec.rhs == 0.0 and rec.passed


def test_trace_lemma_leaves_input_untouched():
    st_ = SpdState.scaled_identity(2, 1.0)
    trace_lemma_check(st_, [1.0, 0.0])
    np.testing.assert_array_equal(st_.matrix_M, np.eye(2))


def test_trace_lemma_random(rng):
    for _ in range(10_000 // 50):
        d = int(rng.integers(1, 7))
        st_ = SpdState.scaled_identity(d, float(rng.choice([0.1, 1.0, 10.0])))
        for x in random_ball(rng, 50, d):
            before = st_.logdet_M
            quad = st_.update(x)
            # both sides computed directly for the oracle
            direct = float(x @ np.linalg.solve(st_.matrix_M, x))
            assert quad == pytest.approx(direct, rel=1e-9, abs=1e-12)
            assert quad <= (st_.logdet_M - before) + 1e-9


def test_logdet_bound_examples():
    rec = logdet_delta_bound_check(1.0, 2, [np.array([1.0, 0.0])] * 10)
    assert rec.lhs == pytest.approx(math.log(11.0), abs=1e-12)
    assert rec.rhs == pytest.approx(2 * math.log(6.0), abs=1e-12)
    assert rec.passed
    rec = logdet_delta_bound_check(1.0, 3, [])
    assert rec.lhs == 0.0 and rec.rhs == 0.0 and rec.passed


def test_logdet_bound_random_unit_vectors(rng):
    X = rng.standard_normal((1000, 8))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    rec = logdet_delta_bound_check(0.5, 8, X)
    direct = np.linalg.slogdet(0.5 * np.eye(8) + X.T @ X)[1] - 8 * math.log(0.5)
    assert rec.lhs == pytest.approx(direct, abs=1e-8)
    assert rec.passed


@settings(max_examples=100, deadline=None)
@given(
    d=st.integers(1, 5),
    a=st.floats(0.01, 100.0),
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(0, 40),
)
def test_property_logdet_bound(d, a, seed, n):
    X = random_ball(np.random.default_rng(seed), n, d)
    assert logdet_delta_bound_check(a, d, X).passed
