"""Curve descriptors and the Frenet apparatus."""

import numpy as np
import pytest

from frenetife.curve import (CurveDescriptor, circle, curvature_derivative,
                             ellipse, frenet_apparatus, sample_curve,
                             wrap_near)
from frenetife.errors import DegenerateCurveError


def test_circle_apparatus():
    for r in (0.5, 2.0):
        c = circle(r)
        xi = np.linspace(0.0, 2.0 * np.pi, 9, endpoint=False)
        ap = frenet_apparatus(c, xi)
        np.testing.assert_allclose(ap.speed, r, rtol=1e-14)
        np.testing.assert_allclose(ap.curvature, 1.0 / r, rtol=1e-14)
        # the normal is the outward radial direction
        radial = np.asarray(c.g(xi)) / r
        np.testing.assert_allclose(ap.normal, radial, atol=1e-14)
        np.testing.assert_allclose(np.einsum('ij,ij->i', ap.tangent,
                                             ap.normal), 0.0, atol=1e-15)


def test_ellipse_apparatus_frozen():
    ap = frenet_apparatus(ellipse(1.0, 0.6), 0.0)
    assert ap.speed == pytest.approx(0.6, abs=1e-15)
    assert ap.curvature == pytest.approx(25.0 / 9.0, rel=1e-14)
    np.testing.assert_allclose(ap.tangent, [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(ap.normal, [1.0, 0.0], atol=1e-15)


def test_ellipse_curvature_formula():
    a, b = 1.3, 0.7
    c = ellipse(a, b)
    xi = np.linspace(0.1, 6.0, 11)
    s2 = a * a * np.sin(xi) ** 2 + b * b * np.cos(xi) ** 2
    np.testing.assert_allclose(frenet_apparatus(c, xi).curvature,
                               a * b / s2 ** 1.5, rtol=1e-13)


def test_curvature_derivative_matches_analytic():
    a, b = 1.0, 0.6
    c = ellipse(a, b)
    xi = np.array([0.3, 0.7, 2.0, 4.1])
    s = np.sqrt(a * a * np.sin(xi) ** 2 + b * b * np.cos(xi) ** 2)
    ds = (a * a - b * b) * np.sin(xi) * np.cos(xi) / s
    np.testing.assert_allclose(curvature_derivative(c, xi),
                               -3.0 * a * b * ds / s ** 4, rtol=1e-6)


def test_side_indicator():
    c = circle(1.0 / np.sqrt(3.0))
    assert c.side(0.1, 0.1) < 0
    assert c.side(1.0, 1.0) > 0
    assert c.side(1.0 / np.sqrt(3.0), 0.0) == 0


def test_sample_curve_periodic_endpoint_excluded():
    xi, pts = sample_curve(circle(1.0), 8)
    assert xi.size == 8
    assert xi[-1] < 2.0 * np.pi
    assert not np.allclose(pts[0], pts[-1])
    with pytest.raises(ValueError):
        sample_curve(circle(1.0), 1)


def test_wrap_near():
    c = circle(1.0)
    assert wrap_near(c, 0.1, 2.0 * np.pi) == pytest.approx(2.0 * np.pi + 0.1)
    assert wrap_near(c, 6.2, 0.0) == pytest.approx(6.2 - 2.0 * np.pi)
    np.testing.assert_allclose(
        wrap_near(c, np.array([0.1, 6.2]), np.array([0.0, 0.0])),
        [0.1, 6.2 - 2.0 * np.pi])


def test_degenerate_curve_rejected():
    def const(xi):
        xi = np.asarray(xi, dtype=float)
        return np.stack((np.ones_like(xi), np.zeros_like(xi)), axis=-1)

    def zero(xi):
        xi = np.asarray(xi, dtype=float)
        return np.zeros(xi.shape + (2,))

    with pytest.raises(DegenerateCurveError):
        CurveDescriptor(g=const, dg=zero, ddg=zero,
                        side=lambda x, y: np.ones_like(np.asarray(x)),
                        xi_start=0.0, xi_end=1.0, periodic=False)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        circle(0.0)
    with pytest.raises(ValueError):
        ellipse(1.0, -0.5)
    with pytest.raises(ValueError):
        CurveDescriptor(g=None, dg=None, ddg=None, side=None,
                        xi_start=1.0, xi_end=1.0, periodic=False)


def test_period_property():
    assert circle(2.5).period == pytest.approx(2.0 * np.pi)
