"""Pure numpy implementation of the per-element hot kernels.

Mirrors ``_fast.pyx``; the dispatcher in ``__init__`` picks whichever is
available.  Both backends take and return plain float64 arrays:

* ``legendre_table(m, dmax, x)`` -> ``(m+1, dmax+1, len(x))`` with entry
  ``[i, d, r] = P_i^(d)(x_r)`` (Legendre, derivative order d).
* ``q_table(m, dmax, x)`` -> same layout for the flux-matching family
  ``q_0 = 1``, ``q_1 = x``, ``q_i = i P_i + (i-1) P_{i-2} - (2i-1) P_{i-1}(0) x``.
* ``b_vec`` / ``a_block`` / ``atilde`` assemble the interface-line
  quadrature sums of the weak jump conditions; see ``ifebasis``.
"""

from __future__ import annotations

from math import comb

import numpy as np

BACKEND = "python"


def legendre_zero(m: int) -> np.ndarray:
    """Values P_i(0) for i = 0..m."""
    p0 = np.zeros(m + 1)
    p0[0] = 1.0
    for i in range(2, m + 1, 2):
        p0[i] = -p0[i - 2] * (i - 1) / i
    return p0


def legendre_table(m: int, dmax: int, x) -> np.ndarray:
    """Legendre values and derivatives by the differentiated recurrence."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.zeros((m + 1, dmax + 1, x.size))
    out[0, 0] = 1.0
    if m >= 1:
        out[1, 0] = x
        if dmax >= 1:
            out[1, 1] = 1.0
    for i in range(2, m + 1):
        a = (2.0 * i - 1.0) / i
        b = (i - 1.0) / i
        out[i, 0] = a * x * out[i - 1, 0] - b * out[i - 2, 0]
        for d in range(1, dmax + 1):
            out[i, d] = a * (x * out[i - 1, d] + d * out[i - 1, d - 1]) \
                - b * out[i - 2, d]
    return out


def q_table(m: int, dmax: int, x) -> np.ndarray:
    """Values and derivatives of the q family (same layout as Legendre)."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    p = legendre_table(m, dmax, x)
    p0 = legendre_zero(m)
    out = np.zeros_like(p)
    out[0, 0] = 1.0
    if m >= 1:
        out[1] = p[1]
    for i in range(2, m + 1):
        c = (2.0 * i - 1.0) * p0[i - 1]
        out[i] = i * p[i] + (i - 1.0) * p[i - 2]
        out[i, 0] -= c * x
        if dmax >= 1:
            out[i, 1] -= c
    return out


def b_vec(i: int, j: int, jtab, pipk, xi_h: float, w) -> np.ndarray:
    """Right-hand column of the polynomial-extension system.

    ``(b^(j)(i))_k = sum_r w_r (J0^(j) p_i'' p_k / xi_h + J2^(j) p_i' p_k)``.
    """
    wj0 = w * jtab[j, 0] / xi_h
    wj2 = w * jtab[j, 2]
    return pipk[i, :, 2, :] @ wj0 + pipk[i, :, 1, :] @ wj2


def _extended_rows(j: int, m: int, t_lo: int, jtab, pipk, q0,
                   eta_h: float, xi_h: float, w):
    """Rows of one weak transformed-Laplacian jump block.

    Returns ``(m+1, (m+1-t_lo)*(m+1))`` with columns ordered t-major,
    t = t_lo..m, s = 0..m.
    """
    ts = np.arange(t_lo, m + 1)
    nr = w.shape[0]
    w0 = np.repeat(((xi_h / eta_h ** (j + 2)) * q0[ts, j + 2])[:, None], nr, 1)
    w1 = np.zeros((ts.size, nr))
    w2 = np.zeros((ts.size, nr))
    for i in range(j + 1):
        c = float(comb(j, i))
        w2 += c / (eta_h ** (j - i) * xi_h) * q0[ts, j - i][:, None] \
            * jtab[i, 0][None, :]
        w0 += c * xi_h / eta_h ** (j - i + 1) * q0[ts, j - i + 1][:, None] \
            * jtab[i, 1][None, :]
        w1 += c / eta_h ** (j - i) * q0[ts, j - i][:, None] \
            * jtab[i, 2][None, :]
    out = np.einsum('tr,r,skr->kts', w0, w, pipk[:, :, 0]) \
        + np.einsum('tr,r,skr->kts', w1, w, pipk[:, :, 1]) \
        + np.einsum('tr,r,skr->kts', w2, w, pipk[:, :, 2])
    return out.reshape(m + 1, ts.size * (m + 1))


def a_block(j: int, m: int, jtab, pipk, q0, eta_h: float, xi_h: float, w):
    """Block j of the extension system matrix, columns (t, s) with t >= 2."""
    return _extended_rows(j, m, 2, jtab, pipk, q0, eta_h, xi_h, w)


def atilde(m: int, jtab, pipk, q0, eta_h: float, xi_h: float, w):
    """Full collective jump matrix: trace, flux, then extended blocks."""
    n = m + 1
    mom = xi_h * np.einsum('r,skr->ks', w, pipk[:, :, 0])
    out = np.zeros((n * n, n * n))
    for t in range(n):
        cols = slice(t * n, (t + 1) * n)
        out[:n, cols] = q0[t, 0] * mom
        out[n:2 * n, cols] = (q0[t, 1] / eta_h) * mom
    for j in range(m - 1):
        out[(2 + j) * n:(3 + j) * n, :] = _extended_rows(
            j, m, 0, jtab, pipk, q0, eta_h, xi_h, w)
    return out
