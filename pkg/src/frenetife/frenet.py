"""The tube (normal-offset) coordinate map around an interface curve.

Points near the curve are written as ``x = g(xi) + eta * n(xi)``; the
map is invertible on the tube ``|eta| * max|kappa| < 1``.  The inverse
is computed by a Newton iteration whose Jacobian inverse is known in
closed form, so no linear solves are needed:

    [d_eta, d_xi] = [n(xi) . r,  rho(eta, xi) * (tau(xi) . r)]

with ``r`` the current position residual and ``rho = psi / |g'|``,
``psi = 1 / (1 + eta * kappa)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import CurveDescriptor, frenet_apparatus, wrap_near
from .errors import NewtonConvergenceError, SingularMapError

DEFAULT_MAX_ITER = 25
_DIVERGENCE_STRIKES = 3


@dataclass(frozen=True)
class FrenetPoint:
    """Tube coordinates (normal offset, curve parameter)."""

    eta: float
    xi: float


@dataclass(frozen=True)
class InverseMapReport:
    point: FrenetPoint
    iterations: int
    residual: float


def forward_map(curve: CurveDescriptor, eta, xi):
    """Map tube coordinates to physical coordinates."""
    eta = np.asarray(eta, dtype=float)
    ap = frenet_apparatus(curve, xi)
    return np.asarray(curve.g(xi), dtype=float) + eta[..., None] * ap.normal


def psi_rho(curve: CurveDescriptor, eta, xi):
    """Metric factors psi = 1/(1 + eta*kappa) and rho = psi/|g'|."""
    eta = np.asarray(eta, dtype=float)
    ap = frenet_apparatus(curve, xi)
    denom = 1.0 + eta * ap.curvature
    if np.any(denom <= 1e-12):
        raise SingularMapError(
            f"tube map degenerates: 1 + eta*kappa = {np.min(denom):.3e}")
    psi = 1.0 / denom
    return psi, psi / ap.speed


def jacobian_forward(curve: CurveDescriptor, eta, xi):
    """Jacobian of the forward map, columns [n, |g'| (1 + eta*kappa) tau]."""
    eta = np.asarray(eta, dtype=float)
    ap = frenet_apparatus(curve, xi)
    col_xi = (ap.speed * (1.0 + eta * ap.curvature))[..., None] * ap.tangent
    return np.stack((ap.normal, col_xi), axis=-1)


def physical_gradient(curve: CurveDescriptor, eta, xi, du_eta, du_xi):
    """Push a tube-coordinate gradient to physical coordinates.

    grad u = u_eta * n + u_xi * rho * tau.
    """
    du_eta = np.asarray(du_eta, dtype=float)
    du_xi = np.asarray(du_xi, dtype=float)
    ap = frenet_apparatus(curve, xi)
    _, rho = psi_rho(curve, eta, xi)
    return du_eta[..., None] * ap.normal + (du_xi * rho)[..., None] * ap.tangent


def inverse_map_batch(curve: CurveDescriptor, points, xi_guess,
                      tol_factor: float = 1e-13,
                      max_iter: int = DEFAULT_MAX_ITER):
    """Invert the tube map for a batch of physical points.

    ``xi_guess`` is a scalar shared by all points or one guess per point.
    Returns ``(eta, xi, iterations, residuals)``; the parameter comes back
    on the periodic branch nearest its guess.  Raises
    :class:`NewtonConvergenceError` if any point fails, either by hitting
    ``max_iter`` or after three consecutive residual increases.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    guess = np.broadcast_to(np.asarray(xi_guess, dtype=float), (n,)).copy()
    tol = tol_factor * (1.0 + np.linalg.norm(pts, axis=1))

    eta = np.zeros(n)
    xi = guess.copy()
    iters = np.zeros(n, dtype=int)
    last_res = np.full(n, np.inf)
    strikes = np.zeros(n, dtype=int)
    active = np.ones(n, dtype=bool)
    res = np.zeros(n)

    for it in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ap = frenet_apparatus(curve, xi[idx])
        pos = np.asarray(curve.g(xi[idx]), dtype=float) \
            + eta[idx, None] * ap.normal
        r = pos - pts[idx]
        rn = np.linalg.norm(r, axis=1)
        res[idx] = rn

        done = rn <= tol[idx]
        grew = ~done & (rn > last_res[idx])
        strikes[idx[grew]] += 1
        strikes[idx[~grew]] = 0
        last_res[idx] = rn
        active[idx[done]] = False
        if np.any(strikes >= _DIVERGENCE_STRIKES):
            k = int(np.argmax(strikes >= _DIVERGENCE_STRIKES))
            raise NewtonConvergenceError(
                f"tube inversion diverging at point {pts[k]}",
                point=tuple(pts[k]), iterations=int(iters[k]),
                residual=float(last_res[k]))
        if it == max_iter or not np.any(~done):
            continue

        sub = idx[~done]
        rs = r[~done]
        denom = 1.0 + eta[sub] * ap.curvature[~done]
        if np.any(denom <= 1e-12):
            raise SingularMapError("Newton iterate left the invertible tube")
        rho = 1.0 / (denom * ap.speed[~done])
        eta[sub] -= np.einsum('ij,ij->i', ap.normal[~done], rs)
        xi[sub] -= rho * np.einsum('ij,ij->i', ap.tangent[~done], rs)
        iters[sub] += 1

    if np.any(active):
        k = int(np.argmax(active))
        raise NewtonConvergenceError(
            f"tube inversion did not converge in {max_iter} iterations "
            f"at point {pts[k]} (residual {res[k]:.3e})",
            point=tuple(pts[k]), iterations=max_iter, residual=float(res[k]))

    xi = wrap_near(curve, xi, guess)
    return eta, xi, iters, res


def inverse_map(curve: CurveDescriptor, point, xi_guess: float,
                tol_factor: float = 1e-13,
                max_iter: int = DEFAULT_MAX_ITER) -> InverseMapReport:
    """Invert the tube map for a single physical point."""
    eta, xi, iters, res = inverse_map_batch(
        curve, np.asarray(point, dtype=float)[None, :], xi_guess,
        tol_factor=tol_factor, max_iter=max_iter)
    return InverseMapReport(FrenetPoint(float(eta[0]), float(xi[0])),
                            int(iters[0]), float(res[0]))
