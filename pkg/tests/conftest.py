import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from widthlab.geometry import Ball, Polytope
from widthlab.sphere_quad import build_rule

settings.register_profile(
    "widthlab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("widthlab")


@pytest.fixture(scope="session")
def square():
    return Polytope([[1, 1], [1, -1], [-1, 1], [-1, -1]])


@pytest.fixture(scope="session")
def disk():
    return Ball([0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def rule2():
    return build_rule(2)


@pytest.fixture(scope="session")
def rule2_small():
    return build_rule(2, 4096)


@pytest.fixture(scope="session")
def rule3():
    return build_rule(3)


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
