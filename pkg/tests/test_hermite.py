import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasibasis import hermite
from quasibasis.errors import ConfigurationError, NumericError

# e_n(x) at 40 digits (mpmath), frozen
FROZEN = [
    (0, 0.0, 0.75112554446494248),
    (1, 0.5, 0.46871701988925173),
    (5, 1.3, -0.39939146281375077),
    (10, -2.25, 0.35686474228397491),
    (40, 3.7, 0.16823287525656024),
    (100, 0.1, 0.032306850162958364),
    (300, 20.0, 0.069092268863362744),
    (1000, 40.0, 0.17225052073279227),
]


@pytest.mark.parametrize("n,x,expected", FROZEN)
def test_frozen_values(n, x, expected):
    assert hermite.eval_hermite_function(n, x) == pytest.approx(expected, rel=1e-11, abs=1e-15)


def test_matches_closed_form_low_degree():
    x = np.linspace(-4, 4, 41)
    E = hermite.hermite_functions(3, x)
    c = math.pi ** -0.25 * np.exp(-x * x / 2)
    assert np.allclose(E[0], c, atol=1e-15)
    assert np.allclose(E[1], math.sqrt(2) * x * c, atol=1e-15)
    assert np.allclose(E[2], (2 * x * x - 1) / math.sqrt(2) * c, atol=1e-15)


def test_far_tail_underflows_to_zero_not_nan():
    v = hermite.hermite_functions(64, np.array([60.0, -60.0]))
    assert np.all(np.isfinite(v))
    assert np.all(np.abs(v) < 1e-300)


def test_shape_follows_input():
    assert hermite.hermite_functions(4, np.zeros((2, 3))).shape == (4, 2, 3)
    with pytest.raises(ConfigurationError):
        hermite.hermite_functions(0, 0.0)


@pytest.mark.parametrize("order", [1, 2, 5, 20, 101])
def test_rule_integrates_gaussian_polynomials(order):
    rule = hermite.gauss_hermite_rule(order)
    w = rule.gaussian_weights
    assert w.sum() == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    # exact for x^(2k) up to degree 2*order - 1
    for k in range(0, min(order, 6)):
        exact = math.gamma(k + 0.5)
        assert np.sum(w * rule.nodes ** (2 * k)) == pytest.approx(exact, rel=1e-12)


def test_rule_matches_numpy_at_moderate_order():
    x, w = np.polynomial.hermite.hermgauss(60)
    rule = hermite.gauss_hermite_rule(60)
    assert np.allclose(rule.nodes, x, atol=1e-13)
    assert np.allclose(rule.gaussian_weights, w, rtol=1e-10, atol=1e-300)


def test_rule_order_limits():
    with pytest.raises(ConfigurationError):
        hermite.gauss_hermite_rule(0)
    with pytest.raises(ConfigurationError):
        hermite.gauss_hermite_rule(hermite.MAX_ORDER + 1)
    with pytest.raises(ConfigurationError):
        hermite.gauss_hermite_rule(3.0)


@pytest.mark.parametrize("N", [8, 64, 256])
def test_orthonormality_from_weighted_basis(N):
    rule = hermite.gauss_hermite_rule(hermite.default_order(N))
    W = hermite.weighted_basis(N, rule)
    assert np.abs(W).max() <= 1.0 + 1e-12
    assert np.abs(W @ W.T - np.eye(N)).max() < 1e-13


@pytest.mark.slow
def test_orthonormality_at_largest_size():
    rule = hermite.gauss_hermite_rule(hermite.default_order(512))
    W = hermite.weighted_basis(512, rule)
    assert np.abs(W @ W.T - np.eye(512)).max() < 1e-13


def test_default_order_is_capped():
    assert hermite.default_order(10) == 36
    assert hermite.default_order(512) == hermite.MAX_ORDER


def test_project_and_synthesize_round_trip():
    rule = hermite.gauss_hermite_rule(80)
    c = np.array([0.3, -1.0, 0.0, 2.0, 0.5])
    f = lambda x: hermite.synthesize(c, x)
    back = hermite.project_function(f, 8, rule)
    assert np.allclose(back[:5], c, atol=1e-13)
    assert np.allclose(back[5:], 0, atol=1e-13)


def test_inner_product_reports_bad_node():
    rule = hermite.gauss_hermite_rule(7)
    f = lambda x: np.where(x == 0, np.nan, np.exp(-x * x))
    with pytest.raises(NumericError) as info:
        hermite.project_inner_product(f, lambda x: np.exp(-x * x), rule)
    assert info.value.node == 0.0


def test_grid_window_scales():
    assert hermite.default_grid(4).x_max == 8.0
    assert hermite.default_grid(128).x_max == pytest.approx(math.sqrt(256) + 4)
    assert hermite.default_grid(16).count == 513


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 60), x=st.floats(-9, 9))
def test_against_mpmath(n, x):
    mp.mp.dps = 30
    ref = mp.hermite(n, x) * mp.e ** (-mp.mpf(x) ** 2 / 2) / mp.sqrt(
        2 ** n * mp.factorial(n) * mp.sqrt(mp.pi))
    assert hermite.eval_hermite_function(n, x) == pytest.approx(float(ref), rel=1e-10, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(order=st.integers(2, 400))
def test_rule_symmetric(order):
    rule = hermite.gauss_hermite_rule(order)
    assert np.array_equal(rule.nodes, -rule.nodes[::-1])
    assert np.array_equal(rule.log_weights, rule.log_weights[::-1])
