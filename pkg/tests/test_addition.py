import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from widthlab.addition import (
    addition_from_dict,
    lp_width_sum,
    orlicz_linear_combination,
    orlicz_width_sum,
    solve_lambda,
    solve_lambda_array,
)
from widthlab.errors import InputError, SolverError
from widthlab.geometry import Ball, Ellipsoid, Polytope, WidthProfile, as_profile
from widthlab.orlicz import Mixture, Power, SumOfUnivariate
from widthlab.sphere_quad import build_rule

MIX = Mixture((0.5, 0.5), (1.0, 3.0))
RULE = build_rule(2, 1024)
RULE3 = build_rule(3, 24)
exponents = st.floats(1.0, 5.0)
widths = st.floats(1e-3, 1e3)


def unit_ball(n=2):
    return Ball(np.zeros(n), 1.0)


def weights():
    return st.one_of(exponents.map(Power), st.just(MIX))


@given(exponents, widths)
def test_two_equal_power_terms(p, b):
    lam = solve_lambda([(Power(p), 1.0, b), (Power(p), 1.0, b)])
    assert lam == pytest.approx(b * 2 ** (-1 / p), rel=1e-11)


@given(weights(), widths)
def test_single_term_returns_width(f, b):
    assert solve_lambda([(f, 1.0, b)]) == pytest.approx(b, rel=1e-11)


@given(weights(), st.integers(2, 6), widths)
def test_equal_terms_hit_the_inverse(f, m, b):
    lam = solve_lambda([(f, 1.0, b)] * m)
    assert lam == pytest.approx(b / f.inverse(1.0 / m), rel=1e-10)


# tiny positive coefficients push the root outside the clamp range (see test_solver_errors)
coefficients = st.one_of(st.just(0.0), st.floats(1e-3, 3.0))


@given(st.lists(st.tuples(weights(), coefficients, widths), min_size=1, max_size=4))
def test_residual_vanishes(terms):
    if not any(c > 0 for _, c, _ in terms):
        return
    lam = solve_lambda(terms)
    total = sum(c * f(b / lam) for f, c, b in terms if c > 0)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_solver_errors():
    with pytest.raises(InputError):
        solve_lambda([])
    with pytest.raises(InputError):
        solve_lambda([(Power(1), 0.0, 1.0)])
    with pytest.raises(InputError):
        solve_lambda([(Power(1), 1.0, 0.0)])
    # a tiny coefficient pushes the root below the clamp range
    with pytest.raises(SolverError, match="terms"):
        solve_lambda([(Power(1), 1e-30, 1.0)])


def test_vectorized_solver_matches_scalar():
    rng = np.random.default_rng(3)
    B = rng.uniform(0.1, 10, (2, 50))
    lam = solve_lambda_array([Power(2), MIX], [1.0, 0.5], B)
    for k in range(50):
        assert lam[k] == pytest.approx(
            solve_lambda([(Power(2), 1.0, B[0, k]), (MIX, 0.5, B[1, k])]), rel=1e-12)


def test_sum_of_unit_balls_is_a_ball():
    for p in (1.0, 2.0, 3.5):
        Q = orlicz_width_sum(SumOfUnivariate((Power(p), Power(p))), [unit_ball(), unit_ball()])
        np.testing.assert_allclose(Q.on(RULE), 2 ** (-1 / p), rtol=1e-11)
        assert Q.provenance == "orlicz-sum"


def test_repeated_operand_rescales():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    Q = orlicz_width_sum(SumOfUnivariate((MIX,) * 3), [K, K, K])
    np.testing.assert_allclose(Q.on(RULE), as_profile(K).on(RULE) / MIX.inverse(1 / 3), rtol=1e-11)


@given(st.floats(1.0, 3.0), st.floats(0.0, 0.5), st.integers(0, 10**6))
def test_enlarging_an_operand_never_decreases_the_sum(scale, offset, seed):
    rng = np.random.default_rng(seed)
    K = Polytope(rng.standard_normal((7, 2)))
    L = Ellipsoid(np.diag(rng.uniform(0.3, 3, 2)), [0, 0])
    bL = as_profile(L)
    bigger = WidthProfile(lambda U: scale * bL._evaluate(U) + offset, 2, "linear-combination")
    phi = SumOfUnivariate((Power(2), MIX))
    base = orlicz_width_sum(phi, [K, L]).on(RULE)
    moved = orlicz_width_sum(phi, [K, bigger]).on(RULE)
    assert np.all(moved >= base * (1 - 1e-12))


def test_beta_zero_is_identity():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    P = orlicz_linear_combination(Power(2), MIX, K, unit_ball(), 1.0, 0.0)
    np.testing.assert_array_equal(P.on(RULE), as_profile(K).on(RULE))


@given(exponents, st.floats(1e-4, 2.0))
def test_combination_of_unit_balls(p, eps):
    P = orlicz_linear_combination(Power(p), Power(p), unit_ball(), unit_ball(), 1.0, eps)
    np.testing.assert_allclose(P.on(RULE), (1 + eps) ** (-1 / p), rtol=1e-11)


def test_small_combinations_converge_monotonically():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    L = Ellipsoid([[2, 0.4], [0.4, 0.7]], [1, 1])
    bK = as_profile(K).on(RULE)
    gaps = [np.max(np.abs(orlicz_linear_combination(MIX, Power(2), K, L, 1, eps).on(RULE) - bK))
            for eps in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_lp_sum_of_balls():
    Q = lp_width_sum(1.0, Ball([0, 0], 2.0), Ball([1, 1], 3.0))
    np.testing.assert_allclose(Q.on(RULE), 6 / 5, rtol=1e-14)
    Q = lp_width_sum(2.0, unit_ball(), unit_ball())
    np.testing.assert_allclose(Q.on(RULE), 2 ** -0.5, rtol=1e-15)
    with pytest.raises(InputError):
        lp_width_sum(0.5, unit_ball(), unit_ball())


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
@pytest.mark.parametrize("rule", [RULE, RULE3], ids=["n2", "n3"])
def test_orlicz_sum_agrees_with_lp_sum(p, rule):
    rng = np.random.default_rng(int(p * 10))
    n = rule.dim
    K = Polytope(rng.standard_normal((3 * n, n)))
    L = Ellipsoid(np.diag(rng.uniform(0.3, 3, n)), rng.standard_normal(n))
    a = orlicz_width_sum(SumOfUnivariate((Power(p), Power(p))), [K, L]).on(rule)
    b = lp_width_sum(p, K, L).on(rule)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_residuals_are_tiny():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    L = Ellipsoid([[2, 0.4], [0.4, 0.7]], [1, 1])
    Q = orlicz_width_sum(SumOfUnivariate((MIX, Power(1))), [K, L])
    assert np.max(Q.residual(RULE)) <= 1e-10
    assert np.max(lp_width_sum(3.0, K, L).residual(RULE)) <= 1e-10


def test_continuity_constant_is_bounded():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    L = unit_ball()
    phi = SumOfUnivariate((Power(2), Power(2)))
    base = orlicz_width_sum(phi, [K, L]).on(RULE)
    bK = as_profile(K)
    for delta in (1e-2, 1e-4):
        moved_K = WidthProfile(lambda U: bK._evaluate(U) + delta, 2, "linear-combination")
        moved = orlicz_width_sum(phi, [moved_K, L]).on(RULE)
        assert np.max(np.abs(moved - base)) <= delta


def test_input_contracts():
    with pytest.raises(InputError):
        orlicz_width_sum(Power(2), [unit_ball(), unit_ball()])
    with pytest.raises(InputError):
        orlicz_width_sum(SumOfUnivariate((Power(2), Power(2))), [unit_ball()])
    with pytest.raises(InputError):
        orlicz_width_sum(SumOfUnivariate((Power(2), Power(2))), [unit_ball(), unit_ball(3)])
    with pytest.raises(InputError):
        orlicz_linear_combination(Power(1), Power(1), unit_ball(), unit_ball(), 0, 0)
    with pytest.raises(InputError):
        orlicz_linear_combination(Power(1), Power(1), unit_ball(), unit_ball(), -1, 1)


def test_descriptor_parsing():
    ball = {"type": "ball", "center": [0, 0], "radius": 1}
    spec = addition_from_dict({"op": "lp_sum", "p": 2, "K": ball, "L": ball})
    np.testing.assert_allclose(spec.profile.on(RULE), 2 ** -0.5, rtol=1e-15)
    spec = addition_from_dict({"op": "combination", "phi1": {"type": "power", "p": 2},
                               "phi2": {"type": "power", "p": 2}, "K": ball, "L": ball,
                               "alpha": 1.0, "beta": 0.0})
    assert np.all(spec.residual(RULE) == 0)
    with pytest.raises(InputError, match="addition.K"):
        addition_from_dict({"op": "lp_sum", "p": 2, "K": {"type": "ball"}, "L": ball})
    with pytest.raises(InputError, match="unknown"):
        addition_from_dict({"op": "lp_sum", "p": 2, "K": ball, "L": ball, "q": 1})
    with pytest.raises(InputError, match="op"):
        addition_from_dict({"op": "minkowski"})


def test_scalar_evaluation_agrees_with_nodes():
    K = Polytope([[0, 0], [2, 0.5], [0.3, 1.7]])
    Q = orlicz_linear_combination(MIX, Power(2), K, unit_ball(), 0.7, 0.4)
    values = Q.on(RULE)
    for k in (0, 100, 517):
        assert Q(RULE.nodes[k]) == pytest.approx(values[k], rel=1e-12)
    assert math.isfinite(Q([0.6, 0.8]))
