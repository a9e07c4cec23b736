"""Cartesian background meshes and element classification.

Elements are labelled minus (0), plus (1) or interface (2) from the sign
of the curve's side indicator at the four vertices plus a fixed number
of interior samples per edge; the edge samples catch arcs that enter and
leave through one edge without separating the vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, hypot

import numpy as np

from .curve import CurveDescriptor, sample_curve
from .errors import FrenetIFEError
from .frenet import inverse_map_batch

LABEL_MINUS = 0
LABEL_PLUS = 1
LABEL_INTERFACE = 2

EDGE_SAMPLES = 8


@dataclass(frozen=True)
class CartesianMesh:
    """Uniform rectangular mesh; element vertices run counterclockwise."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    vertices: np.ndarray
    elements: np.ndarray

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def diameter(self) -> float:
        return hypot(self.dx, self.dy)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    def element_vertices(self, elem_id: int) -> np.ndarray:
        return self.vertices[self.elements[elem_id]]

    def element_center(self, elem_id: int) -> np.ndarray:
        return self.element_vertices(elem_id).mean(axis=0)


def build_mesh(n: int, bounds=(-1.0, 1.0, -1.0, 1.0)) -> CartesianMesh:
    """n-by-n uniform mesh of the rectangle (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = map(float, bounds)
    if n < 1 or x1 <= x0 or y1 <= y0:
        raise ValueError("invalid mesh request")
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    gx, gy = np.meshgrid(xs, ys)
    vertices = np.column_stack((gx.ravel(), gy.ravel()))
    i = np.arange(n)
    jj, ii = np.meshgrid(i, i, indexing='ij')
    v00 = jj * (n + 1) + ii
    elements = np.column_stack((v00.ravel(), v00.ravel() + 1,
                                v00.ravel() + n + 2, v00.ravel() + n + 1))
    return CartesianMesh(x0, x1, y0, y1, n, n, vertices, elements)


def _signs(curve: CurveDescriptor, x, y):
    """Side signs with on-curve points (sign 0) counted as minus."""
    s = np.asarray(curve.side(x, y), dtype=float)
    return np.where(s > 0, 1, -1).astype(np.int8)


def classify_elements(mesh: CartesianMesh, curve: CurveDescriptor,
                      n_edge_samples: int = EDGE_SAMPLES) -> np.ndarray:
    """Per-element labels 0 (minus), 1 (plus) or 2 (interface)."""
    vsign = _signs(curve, mesh.vertices[:, 0], mesh.vertices[:, 1])
    esign = vsign[mesh.elements]                       # (ne, 4)
    mixed = (esign.min(axis=1) != esign.max(axis=1))

    if n_edge_samples > 0:
        t = np.linspace(0.0, 1.0, n_edge_samples + 2)[1:-1]
        va = mesh.vertices[mesh.elements]              # (ne, 4, 2)
        vb = np.roll(va, -1, axis=1)
        pts = va[:, :, None, :] + t[None, None, :, None] \
            * (vb - va)[:, :, None, :]
        ssign = _signs(curve, pts[..., 0], pts[..., 1]).reshape(len(va), -1)
        mixed |= (ssign.min(axis=1) != esign[:, 0]) \
            | (ssign.max(axis=1) != esign[:, 0])

    labels = np.where(esign[:, 0] > 0, LABEL_PLUS, LABEL_MINUS)
    labels[mixed] = LABEL_INTERFACE
    return labels.astype(np.int8)


@dataclass(frozen=True)
class FrenetElementInfo:
    """Tube-coordinate data of one interface element.

    ``eta``/``xi`` are the vertex images under the inverse tube map, all
    on the parameter branch nearest ``xi_guess``; the half-widths
    ``eta_h`` and ``xi_h`` scale the local polynomial basis.
    """

    element_id: int
    vertices: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    eta_h: float
    xi_lo: float
    xi_hi: float
    xi_mid: float
    xi_h: float
    xi_guess: float


def default_sample_count(h: float) -> int:
    """Curve samples for the direct-search parameter guess."""
    return max(64, ceil(4.0 / h))


def xi_init_guess(curve: CurveDescriptor, centers, count: int):
    """Nearest sampled curve parameter to each query point.

    Ties pick the lowest sample index, so results do not depend on the
    evaluation order.
    """
    xi_s, pts = sample_curve(curve, count)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    d2 = ((centers[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    best = np.argmin(d2, axis=1)
    out = xi_s[best]
    return out if out.size != 1 else float(out[0])


def element_info_from_vertices(curve: CurveDescriptor, vertices,
                               xi_guess: float,
                               element_id: int = -1) -> FrenetElementInfo:
    """Invert the four vertices and derive the local box extents."""
    vertices = np.asarray(vertices, dtype=float)
    eta, xi, _, _ = inverse_map_batch(curve, vertices, xi_guess)
    eta_h = float(np.max(np.abs(eta)))
    if eta_h <= 0.0:
        raise FrenetIFEError(
            f"element {element_id}: all vertices lie on the interface")
    xi_lo, xi_hi = float(np.min(xi)), float(np.max(xi))
    if not xi_hi > xi_lo:
        raise FrenetIFEError(
            f"element {element_id}: degenerate parameter range")
    return FrenetElementInfo(
        element_id=element_id, vertices=vertices, eta=eta, xi=xi,
        eta_h=eta_h, xi_lo=xi_lo, xi_hi=xi_hi,
        xi_mid=0.5 * (xi_lo + xi_hi), xi_h=0.5 * (xi_hi - xi_lo),
        xi_guess=float(xi_guess))


def interface_elem_info(mesh: CartesianMesh, curve: CurveDescriptor,
                        elem_id: int, xi_guess: float | None = None,
                        sample_count: int | None = None) -> FrenetElementInfo:
    """Frenet data for one interface element of ``mesh``."""
    if xi_guess is None:
        if sample_count is None:
            sample_count = default_sample_count(mesh.diameter)
        xi_guess = xi_init_guess(curve, mesh.element_center(elem_id),
                                 sample_count)
    return element_info_from_vertices(curve, mesh.element_vertices(elem_id),
                                      float(xi_guess), element_id=elem_id)
