"""Quadrature rules and the polynomial families used on interface elements.

Two 1-d families appear throughout: Legendre polynomials ``p_i`` in the
along-curve parameter and the flux-matching family ``q_i`` in the normal
offset, defined by

    q_0 = 1,  q_1 = p_1,
    q_i = i p_i + (i-1) p_{i-2} - (2i-1) p_{i-1}(0) x   (i >= 2),

so that ``q_i(0) = 0`` for i >= 1 and ``q_i'(0) = 0`` for i >= 2.
Evaluation goes through the kernel backend (see ``_kernels``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from . import _kernels


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes (strictly increasing) and weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class TriangleRule:
    """Nodes and weights on the reference triangle u, v >= 0, u + v <= 1.

    Built as a conical product: the ray fraction w = u + v carries the
    polar Jacobian weight (a Gauss-Jacobi(1,0) rule reflected onto [0, 1])
    and the cross direction t = v / (u + v) is plain Gauss-Legendre, so a
    node factors as (u, v) = (w_i (1 - t_j), w_i t_j).
    """

    nodes: np.ndarray
    weights: np.ndarray
    ray: np.ndarray
    cross: np.ndarray


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule1D:
    """n-point Gauss-Legendre rule on [-1, 1] (exact through degree 2n-1)."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule1D(x, w)


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, alpha: float = 1.0, beta: float = 0.0) -> QuadratureRule1D:
    """n-point Gauss-Jacobi rule for weight (1-x)^alpha (1+x)^beta."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = roots_jacobi(n, alpha, beta)
    return QuadratureRule1D(x, w)


@lru_cache(maxsize=None)
def stroud_triangle(n: int) -> TriangleRule:
    """Conical-product rule with n^2 interior nodes, total weight 1/2."""
    gj = gauss_jacobi(n, 1.0, 0.0)
    gl = gauss_legendre(n)
    ray = 0.5 * (1.0 - gj.nodes)          # weight function becomes 2w on [0, 1]
    wray = 0.25 * gj.weights
    cross = 0.5 * (1.0 + gl.nodes)
    wcross = 0.5 * gl.weights
    u = np.outer(ray, 1.0 - cross).ravel()
    v = np.outer(ray, cross).ravel()
    return TriangleRule(np.column_stack((u, v)),
                        np.outer(wray, wcross).ravel(),
                        ray, cross)


def legendre_eval(i: int, x, d: int = 0):
    """P_i^(d) at scalar or array argument."""
    x = np.asarray(x, dtype=float)
    out = _kernels.legendre_table(i, d, x.ravel())[i, d]
    return out.reshape(x.shape) if x.shape else float(out[0])


def q_eval(i: int, x, d: int = 0):
    """q_i^(d) at scalar or array argument."""
    x = np.asarray(x, dtype=float)
    out = _kernels.q_table(i, d, x.ravel())[i, d]
    return out.reshape(x.shape) if x.shape else float(out[0])


@lru_cache(maxsize=None)
def pipk_values(m: int, n_nodes: int) -> np.ndarray:
    """Products p_i^(d)(z_r) p_k(z_r) on the n-point Gauss-Legendre rule.

    Shape (m+1, m+1, 3, n) with d = 0, 1, 2; shared by every jump-matrix
    assembly at the same degree and line-rule size.
    """
    rule = gauss_legendre(n_nodes)
    p = _kernels.legendre_table(m, 2, rule.nodes)
    table = np.einsum('idr,kr->ikdr', p, p[:, 0])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def qi_values(m: int) -> np.ndarray:
    """Derivatives q_t^(d)(0), shape (m+1, m+3)."""
    table = np.ascontiguousarray(
        _kernels.q_table(m, m + 2, np.zeros(1))[:, :, 0])
    table.setflags(write=False)
    return table
