# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_ref``; same functions, same array layouts."""

import numpy as np

BACKEND = "cython"


def legendre_zero(int m):
    out = np.zeros(m + 1)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    o[0] = 1.0
    for i in range(2, m + 1, 2):
        o[i] = -o[i - 2] * (i - 1.0) / i
    return out


def legendre_table(int m, int dmax, x):
    xa = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.zeros((m + 1, dmax + 1, xa.size))
    cdef double[::1] xv = xa
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, d, r, n = xv.shape[0]
    cdef double a, b
    for r in range(n):
        o[0, 0, r] = 1.0
    if m >= 1:
        for r in range(n):
            o[1, 0, r] = xv[r]
        if dmax >= 1:
            for r in range(n):
                o[1, 1, r] = 1.0
    for i in range(2, m + 1):
        a = (2.0 * i - 1.0) / i
        b = (i - 1.0) / i
        for r in range(n):
            o[i, 0, r] = a * xv[r] * o[i - 1, 0, r] - b * o[i - 2, 0, r]
        for d in range(1, dmax + 1):
            for r in range(n):
                o[i, d, r] = a * (xv[r] * o[i - 1, d, r]
                                  + d * o[i - 1, d - 1, r]) \
                    - b * o[i - 2, d, r]
    return out


def q_table(int m, int dmax, x):
    xa = np.ascontiguousarray(x, dtype=np.float64).ravel()
    p = legendre_table(m, dmax, xa)
    p0 = legendre_zero(m)
    out = np.zeros_like(p)
    cdef double[:, :, ::1] o = out
    cdef double[:, :, ::1] pv = p
    cdef double[::1] p0v = p0
    cdef double[::1] xv = xa
    cdef Py_ssize_t i, d, r, n = xv.shape[0]
    cdef double c
    for r in range(n):
        o[0, 0, r] = 1.0
    if m >= 1:
        for d in range(dmax + 1):
            for r in range(n):
                o[1, d, r] = pv[1, d, r]
    for i in range(2, m + 1):
        c = (2.0 * i - 1.0) * p0v[i - 1]
        for d in range(dmax + 1):
            for r in range(n):
                o[i, d, r] = i * pv[i, d, r] + (i - 1.0) * pv[i - 2, d, r]
        for r in range(n):
            o[i, 0, r] -= c * xv[r]
        if dmax >= 1:
            for r in range(n):
                o[i, 1, r] -= c
    return out


def b_vec(int i, int j, jtab, pipk, double xi_h, w):
    cdef const double[:, :, ::1] jt = np.ascontiguousarray(jtab, dtype=np.float64)
    cdef const double[:, :, :, ::1] pk = np.ascontiguousarray(pipk, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t mp1 = pk.shape[1], nr = wv.shape[0], k, r
    out = np.zeros(mp1)
    cdef double[::1] o = out
    cdef double acc
    for k in range(mp1):
        acc = 0.0
        for r in range(nr):
            acc += wv[r] * (jt[j, 0, r] * pk[i, k, 2, r] / xi_h
                            + jt[j, 2, r] * pk[i, k, 1, r])
        o[k] = acc
    return out


cdef _weight_profiles(int j, int m, int t_lo, const double[:, :, ::1] jt,
                      const double[:, ::1] q0, double eta_h, double xi_h,
                      Py_ssize_t nr):
    cdef Py_ssize_t nt = m + 1 - t_lo, it, i, r, t
    w0 = np.zeros((nt, nr))
    w1 = np.zeros((nt, nr))
    w2 = np.zeros((nt, nr))
    cdef double[:, ::1] w0v = w0, w1v = w1, w2v = w2
    cdef double c, s0, s1, s2
    for it in range(nt):
        t = t_lo + it
        s0 = (xi_h / eta_h ** (j + 2)) * q0[t, j + 2]
        for r in range(nr):
            w0v[it, r] = s0
        c = 1.0
        for i in range(j + 1):
            if i > 0:
                c = c * (j - i + 1) / i
            s2 = c / (eta_h ** (j - i) * xi_h) * q0[t, j - i]
            s0 = c * xi_h / eta_h ** (j - i + 1) * q0[t, j - i + 1]
            s1 = c / eta_h ** (j - i) * q0[t, j - i]
            for r in range(nr):
                w2v[it, r] += s2 * jt[i, 0, r]
                w0v[it, r] += s0 * jt[i, 1, r]
                w1v[it, r] += s1 * jt[i, 2, r]
    return w0, w1, w2


def _extended_rows(int j, int m, int t_lo, jtab, pipk, q0,
                   double eta_h, double xi_h, w):
    cdef const double[:, :, ::1] jt = np.ascontiguousarray(jtab, dtype=np.float64)
    cdef const double[:, :, :, ::1] pk = np.ascontiguousarray(pipk, dtype=np.float64)
    cdef const double[:, ::1] q0v = np.ascontiguousarray(q0, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t nt = m + 1 - t_lo, nr = wv.shape[0], t, s, k, r
    w0, w1, w2 = _weight_profiles(j, m, t_lo, jt, q0v, eta_h, xi_h, nr)
    cdef double[:, ::1] w0v = w0, w1v = w1, w2v = w2
    out = np.zeros((m + 1, nt * (m + 1)))
    cdef double[:, ::1] o = out
    cdef double acc
    for t in range(nt):
        for s in range(m + 1):
            for k in range(m + 1):
                acc = 0.0
                for r in range(nr):
                    acc += wv[r] * (w0v[t, r] * pk[s, k, 0, r]
                                    + w1v[t, r] * pk[s, k, 1, r]
                                    + w2v[t, r] * pk[s, k, 2, r])
                o[k, t * (m + 1) + s] = acc
    return out


def a_block(int j, int m, jtab, pipk, q0, double eta_h, double xi_h, w):
    return _extended_rows(j, m, 2, jtab, pipk, q0, eta_h, xi_h, w)


def atilde(int m, jtab, pipk, q0, double eta_h, double xi_h, w):
    cdef const double[:, :, :, ::1] pk = np.ascontiguousarray(pipk, dtype=np.float64)
    cdef const double[:, ::1] q0v = np.ascontiguousarray(q0, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = m + 1, nr = wv.shape[0], t, s, k, r, j
    out = np.zeros((n * n, n * n))
    cdef double[:, ::1] o = out
    cdef double acc
    for s in range(n):
        for k in range(n):
            acc = 0.0
            for r in range(nr):
                acc += wv[r] * pk[s, k, 0, r]
            acc *= xi_h
            for t in range(n):
                o[k, t * n + s] = q0v[t, 0] * acc
                o[n + k, t * n + s] = (q0v[t, 1] / eta_h) * acc
    for j in range(m - 1):
        block = _extended_rows(j, m, 0, jtab, pipk, q0, eta_h, xi_h, w)
        out[(2 + j) * n:(3 + j) * n, :] = block
    return out
