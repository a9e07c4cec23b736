"""Parametrized interface curves and their Frenet apparatus.

A curve is described by numpy-vectorized evaluators for the map
``g(xi)``, its first two derivatives, and a side indicator for the two
subdomains it separates.  The unit tangent / normal pair, the signed
curvature and the parametrization speed are derived quantities; the
normal is the tangent rotated a quarter turn clockwise, so it points
from the minus side into the plus side for the built-in curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .errors import DegenerateCurveError

_VALIDATION_SAMPLES = 256


@dataclass(frozen=True)
class CurveDescriptor:
    """A C^2 planar curve with a side indicator.

    Evaluators must accept scalars or 1-d arrays of the parameter.
    ``g``, ``dg`` and ``ddg`` return points with a trailing axis of
    length 2; ``side`` takes physical coordinates ``(x, y)`` and returns
    -1 on the minus side, +1 on the plus side (0 counts as minus).
    For periodic curves the evaluators must be defined on all of R with
    period ``xi_end - xi_start``.
    """

    g: Callable
    dg: Callable
    ddg: Callable
    side: Callable
    xi_start: float
    xi_end: float
    periodic: bool
    name: str = field(default="curve")

    def __post_init__(self):
        if not self.xi_end > self.xi_start:
            raise ValueError("empty parameter interval")
        xi = np.linspace(self.xi_start, self.xi_end, _VALIDATION_SAMPLES,
                         endpoint=not self.periodic)
        speed = np.linalg.norm(np.asarray(self.dg(xi), dtype=float), axis=-1)
        if not np.all(speed > 1e-12):
            raise DegenerateCurveError(
                f"curve '{self.name}': vanishing speed on validation sample "
                f"(min {speed.min():.3e})")

    @property
    def period(self) -> float:
        return self.xi_end - self.xi_start


@dataclass(frozen=True)
class FrenetApparatus:
    """Tangent/normal frame, curvature and speed at one or more parameters."""

    tangent: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray
    speed: np.ndarray


def frenet_apparatus(curve: CurveDescriptor, xi) -> FrenetApparatus:
    """Evaluate the Frenet frame of ``curve`` at parameter(s) ``xi``.

    The normal is ``Q tau`` with ``Q = [[0, 1], [-1, 0]]`` and the signed
    curvature is ``det[g', g''] / |g'|^3``.
    """
    d = np.asarray(curve.dg(xi), dtype=float)
    dd = np.asarray(curve.ddg(xi), dtype=float)
    speed = np.linalg.norm(d, axis=-1)
    if not np.all(speed > 1e-12):
        raise DegenerateCurveError(
            f"curve '{curve.name}': vanishing speed at xi={xi!r}")
    tangent = d / speed[..., None]
    normal = np.stack((tangent[..., 1], -tangent[..., 0]), axis=-1)
    curvature = (d[..., 0] * dd[..., 1] - d[..., 1] * dd[..., 0]) / speed**3
    return FrenetApparatus(tangent, normal, curvature, speed)


def curvature_derivative(curve: CurveDescriptor, xi):
    """d(kappa)/d(xi) by central differences of the curvature formula.

    Step is 1e-6 * max(1, |xi|), which keeps the truncation and round-off
    contributions balanced for curvature values of order one.
    """
    xi = np.asarray(xi, dtype=float)
    step = 1e-6 * np.maximum(1.0, np.abs(xi))
    kp = frenet_apparatus(curve, xi + step).curvature
    km = frenet_apparatus(curve, xi - step).curvature
    return (kp - km) / (2.0 * step)


def sample_curve(curve: CurveDescriptor, count: int):
    """Uniform parameter samples and their images.

    The endpoint is excluded for periodic curves so no point appears twice.
    """
    if count < 2:
        raise ValueError("need at least two samples")
    xi = np.linspace(curve.xi_start, curve.xi_end, count,
                     endpoint=not curve.periodic)
    return xi, np.asarray(curve.g(xi), dtype=float)


def wrap_near(curve: CurveDescriptor, xi, ref):
    """Move ``xi`` to the periodic branch nearest ``ref``.

    No-op for non-periodic curves.
    """
    if not curve.periodic:
        return xi
    period = curve.period
    return ref + np.mod(xi - ref + 0.5 * period, period) - 0.5 * period


# ---------------------------------------------------------------------------
# built-in curves (module-level evaluators keep the descriptors picklable)

def _circle_point(xi, r, cx, cy):
    xi = np.asarray(xi, dtype=float)
    return np.stack((cx + r * np.cos(xi), cy + r * np.sin(xi)), axis=-1)


def _circle_velocity(xi, r):
    xi = np.asarray(xi, dtype=float)
    return np.stack((-r * np.sin(xi), r * np.cos(xi)), axis=-1)


def _circle_acceleration(xi, r):
    xi = np.asarray(xi, dtype=float)
    return np.stack((-r * np.cos(xi), -r * np.sin(xi)), axis=-1)


def _circle_side(x, y, r, cx, cy):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sign((x - cx) ** 2 + (y - cy) ** 2 - r * r)


def circle(radius: float = 1.0, center=(0.0, 0.0)) -> CurveDescriptor:
    """Counterclockwise circle; the minus side is the interior."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    cx, cy = float(center[0]), float(center[1])
    return CurveDescriptor(
        g=partial(_circle_point, r=radius, cx=cx, cy=cy),
        dg=partial(_circle_velocity, r=radius),
        ddg=partial(_circle_acceleration, r=radius),
        side=partial(_circle_side, r=radius, cx=cx, cy=cy),
        xi_start=0.0,
        xi_end=2.0 * np.pi,
        periodic=True,
        name=f"circle(r={radius:g})",
    )


def _ellipse_point(xi, a, b, cx, cy):
    xi = np.asarray(xi, dtype=float)
    return np.stack((cx + a * np.cos(xi), cy + b * np.sin(xi)), axis=-1)


def _ellipse_velocity(xi, a, b):
    xi = np.asarray(xi, dtype=float)
    return np.stack((-a * np.sin(xi), b * np.cos(xi)), axis=-1)


def _ellipse_acceleration(xi, a, b):
    xi = np.asarray(xi, dtype=float)
    return np.stack((-a * np.cos(xi), -b * np.sin(xi)), axis=-1)


def _ellipse_side(x, y, a, b, cx, cy):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sign(((x - cx) / a) ** 2 + ((y - cy) / b) ** 2 - 1.0)


def ellipse(a: float, b: float, center=(0.0, 0.0)) -> CurveDescriptor:
    """Axis-aligned counterclockwise ellipse; the minus side is the interior."""
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    cx, cy = float(center[0]), float(center[1])
    return CurveDescriptor(
        g=partial(_ellipse_point, a=a, b=b, cx=cx, cy=cy),
        dg=partial(_ellipse_velocity, a=a, b=b),
        ddg=partial(_ellipse_acceleration, a=a, b=b),
        side=partial(_ellipse_side, a=a, b=b, cx=cx, cy=cy),
        xi_start=0.0,
        xi_end=2.0 * np.pi,
        periodic=True,
        name=f"ellipse(a={a:g},b={b:g})",
    )
