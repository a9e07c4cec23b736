"""Quadrature exactness and the two 1-d polynomial families."""

import numpy as np
import pytest
from math import factorial
from numpy.polynomial import legendre as npleg

from frenetife.polyquad import (QuadratureRule1D, gauss_legendre, gauss_jacobi,
                                legendre_eval, pipk_values, q_eval, qi_values,
                                stroud_triangle)


def test_gauss_legendre_monomial_exactness():
    for n in (1, 3, 5, 8):
        rule = gauss_legendre(n)
        for k in range(2 * n):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            assert np.isclose((rule.nodes ** k) @ rule.weights, exact,
                              atol=1e-14)


def test_gauss_legendre_nodes_increasing():
    rule = gauss_legendre(7)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.isclose(rule.weights.sum(), 2.0)


def test_gauss_legendre_rejects_empty():
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_gauss_jacobi_weighted_monomials():
    # integral of (1-x) x^k over [-1, 1]
    n = 6
    rule = gauss_jacobi(n, 1.0, 0.0)
    for k in range(2 * n):
        exact = 2.0 / (k + 1) if k % 2 == 0 else -2.0 / (k + 2)
        assert np.isclose((rule.nodes ** k) @ rule.weights, exact, atol=1e-13)


def test_stroud_triangle_weight_sum():
    assert np.isclose(stroud_triangle(3).weights.sum(), 0.5, atol=1e-14)


def test_stroud_triangle_moments():
    # int_T u^a v^b = a! b! / (a+b+2)! on the unit simplex
    n = 4
    rule = stroud_triangle(n)
    u, v = rule.nodes[:, 0], rule.nodes[:, 1]
    for a in range(2 * n):
        for b in range(2 * n - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            got = (u ** a * v ** b) @ rule.weights
            assert np.isclose(got, exact, rtol=1e-13, atol=1e-16), (a, b)


def test_stroud_triangle_nodes_inside():
    rule = stroud_triangle(5)
    u, v = rule.nodes[:, 0], rule.nodes[:, 1]
    assert np.all(u > 0) and np.all(v > 0) and np.all(u + v < 1)


def test_legendre_frozen_values():
    assert legendre_eval(2, 0.5) == pytest.approx(-0.125, abs=1e-15)
    assert legendre_eval(3, 0.5) == pytest.approx(-0.4375, abs=1e-15)
    for i in range(7):
        assert legendre_eval(i, 1.0) == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("i,d", [(2, 0), (3, 1), (5, 2), (7, 3)])
def test_legendre_matches_numpy_polynomial(i, d):
    x = np.linspace(-1.0, 1.0, 17)
    coef = np.zeros(i + 1)
    coef[i] = 1.0
    for _ in range(d):
        coef = npleg.legder(coef)
    np.testing.assert_allclose(legendre_eval(i, x, d), npleg.legval(x, coef),
                               rtol=1e-13, atol=1e-13)


def test_q_closed_forms():
    x = np.linspace(-1.0, 1.0, 23)
    np.testing.assert_allclose(q_eval(0, x), np.ones_like(x), atol=1e-15)
    np.testing.assert_allclose(q_eval(1, x), x, atol=1e-15)
    np.testing.assert_allclose(q_eval(2, x), 3.0 * x ** 2, atol=1e-14)
    np.testing.assert_allclose(q_eval(3, x), 7.5 * x ** 3, atol=1e-14)
    np.testing.assert_allclose(q_eval(4, x), 17.5 * x ** 4 - 10.5 * x ** 2,
                               atol=1e-13)


@pytest.mark.parametrize("i", range(2, 9))
def test_q_dual_form(i):
    # the recurrence collapses to q_i = (2i-1) x (P_{i-1}(x) - P_{i-1}(0))
    x = np.linspace(-1.0, 1.0, 31)
    e = np.zeros(i)
    e[i - 1] = 1.0
    dual = (2 * i - 1) * x * (npleg.legval(x, e) - npleg.legval(0.0, e))
    np.testing.assert_allclose(q_eval(i, x), dual, rtol=1e-13, atol=1e-13)


def test_q_interface_line_values():
    for i in range(1, 9):
        assert q_eval(i, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert q_eval(1, 0.0, d=1) == pytest.approx(1.0, abs=1e-15)
    for i in range(2, 9):
        assert q_eval(i, 0.0, d=1) == pytest.approx(0.0, abs=1e-13)


def test_qi_values_table():
    table = qi_values(4)
    assert table.shape == (5, 7)
    assert table[0, 0] == pytest.approx(1.0)
    assert table[2, 2] == pytest.approx(6.0)       # q2'' = 6
    assert table[3, 3] == pytest.approx(45.0)      # q3''' = 45
    assert table[4, 2] == pytest.approx(-21.0)     # q4'' (0) = -21
    assert table[4, 4] == pytest.approx(420.0)     # q4'''' = 420
    # derivatives beyond the degree vanish
    assert table[2, 3] == 0.0 and table[3, 5] == 0.0


def test_qi_values_readonly():
    with pytest.raises(ValueError):
        qi_values(3)[0, 0] = 2.0


def test_pipk_values_against_direct_products():
    m, n = 3, 6
    table = pipk_values(m, n)
    rule = gauss_legendre(n)
    assert table.shape == (m + 1, m + 1, 3, n)
    for i in range(m + 1):
        for k in range(m + 1):
            for d in range(3):
                direct = legendre_eval(i, rule.nodes, d) \
                    * legendre_eval(k, rule.nodes)
                np.testing.assert_allclose(table[i, k, d], direct,
                                           rtol=1e-13, atol=1e-13)


def test_rule_types():
    assert isinstance(gauss_legendre(2), QuadratureRule1D)
    assert stroud_triangle(2).nodes.shape == (4, 2)
