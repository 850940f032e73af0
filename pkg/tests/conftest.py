import numpy as np
import pytest

from expconcave.losses import LossKind, compute_constants


@pytest.fixture
def logistic():
    return compute_constants(LossKind.LOGISTIC, 1.0)


@pytest.fixture
def squared():
    return compute_constants(LossKind.SQUARED_MARGIN, 1.0)


@pytest.fixture(params=[LossKind.LOGISTIC, LossKind.SQUARED_MARGIN], ids=lambda k: k.value)
def any_loss(request):
    return compute_constants(request.param, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_ball(rng, n, d, R=1.0):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return R * g * rng.random((n, 1)) ** (1.0 / d)
