import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from widthlab.errors import EvaluationError, InputError
from widthlab.sphere_quad import (
    RESOLUTION_ENV,
    ball_volume,
    build_rule,
    default_resolution,
    integrate,
    sphere_area,
)


def test_closed_forms():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_circle_weights_sum_exactly():
    rule = build_rule(2, 64)
    assert rule.weights.sum() == pytest.approx(2 * math.pi, rel=1e-15)
    assert np.all(rule.weights == 2 * math.pi / 64)


def test_sphere_weights():
    assert build_rule(3, 32).weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)


def test_monte_carlo_weights():
    rule = build_rule(4, 1000, seed=7)
    assert rule.weights.sum() == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert rule.descriptor() == {"dim": 4, "kind": "monte-carlo", "resolution": 1000, "seed": 7}
    again = build_rule(4, 1000, seed=7)
    np.testing.assert_array_equal(rule.nodes, again.nodes)


@pytest.mark.parametrize("dim, res", [(2, 16), (2, 4096), (3, 16), (3, 64), (5, 500)])
def test_nodes_are_unit(dim, res):
    rule = build_rule(dim, res)
    np.testing.assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-12)
    assert np.all(rule.weights > 0)


def test_monomials():
    assert integrate(build_rule(3, 32), 1.0) == pytest.approx(4 * math.pi, rel=1e-12)
    assert integrate(build_rule(2, 64), lambda U: U[:, 0] ** 2) == pytest.approx(math.pi, abs=1e-12)
    assert integrate(build_rule(3, 32), lambda U: U[:, 2] ** 2) == pytest.approx(
        4 * math.pi / 3, abs=1e-10)


@pytest.mark.parametrize("dim, res", [(2, 64), (2, 65536), (3, 16), (3, 64)])
def test_odd_functions_vanish(dim, res):
    rule = build_rule(dim, res)
    for k in range(dim):
        assert abs(integrate(rule, lambda U: U[:, k])) < 1e-12
    np.testing.assert_array_equal(np.sort(rule.nodes, axis=0), np.sort(-rule.nodes, axis=0))


def test_refinement_reduces_square_error():
    exact = math.pi + 2
    errors = []
    for res in (64, 128, 256, 512):
        rule = build_rule(2, res)
        value = integrate(rule, lambda U: np.abs(U).sum(axis=1) ** 2) / 2
        errors.append(abs(value - exact))
    for coarse, fine in zip(errors, errors[1:]):
        assert fine * 3 <= coarse


@given(st.integers(2, 3), st.integers(4, 200).map(lambda k: 4 * k))
def test_descriptor_identity(dim, res):
    rule = build_rule(dim, res)
    assert build_rule(dim, res) is rule
    assert rule.descriptor()["seed"] is None


def test_input_errors():
    with pytest.raises(InputError):
        build_rule(1)
    with pytest.raises(InputError):
        build_rule(2, 8)
    with pytest.raises(InputError):
        build_rule(2, 66)


def test_non_finite_integrand_names_the_node():
    rule = build_rule(2, 16)

    def f(U):
        out = np.ones(len(U))
        out[3] = np.nan
        return out

    with pytest.raises(EvaluationError, match="3"):
        integrate(rule, f)


def test_default_resolution_env(monkeypatch):
    assert default_resolution(2) == 65536
    assert default_resolution(3) == 64
    assert default_resolution(4) == 200000
    monkeypatch.setenv(RESOLUTION_ENV, "1024")
    assert default_resolution(2) == 1024
