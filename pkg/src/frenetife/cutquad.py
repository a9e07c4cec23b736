"""Quadrature on elements cut by the interface curve.

The curve crosses an interface element through two distinct edges.  When
the edges are adjacent each sub-region is fanned into triangles from the
centroid of its straight polygon, so every triangle has at most one
curved edge; a curved triangle maps the conical rule through the polar
blending

    F(u, v) = (1 - w) A + w g(xi_a + t (xi_b - xi_a)),
    w = u + v,  t = v / (u + v),

whose Jacobian determinant ``(xi_b - xi_a) det[g(xi(t)) - A, g'(xi(t))]``
is known in closed form.  When the cut edges are opposite, the two
sub-regions are curved quadrilaterals handled by a transfinite map that
is linear in the transverse direction and follows the curve along the
fourth side, with tensor Gauss-Legendre nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import CurveDescriptor
from .errors import CutTopologyError
from .frenet import inverse_map_batch
from .polyquad import gauss_legendre, stroud_triangle

_BISECT_TOL = 1e-14
_DEGENERATE_REL = 1e-14


@dataclass(frozen=True)
class CutRegion:
    """One sub-region: its straight boundary chain plus the closing arc.

    ``polygon`` starts and ends at the two intersection points and walks
    the element boundary counterclockwise; the arc returns from the last
    polygon point (parameter ``arc_from``) to the first (``arc_to``).
    """

    side: int
    polygon: np.ndarray
    arc_from: float
    arc_to: float
    corner_ids: tuple


@dataclass(frozen=True)
class CutTopology:
    kind: str                  # "adjacent" or "opposite"
    entry_edge: int
    exit_edge: int
    entry_point: np.ndarray
    exit_point: np.ndarray
    xi_entry: float
    xi_exit: float
    region_minus: CutRegion
    region_plus: CutRegion


@dataclass(frozen=True)
class CutQuadrature:
    """Positive-weight nodes per side with their tube coordinates."""

    nodes_minus: np.ndarray
    weights_minus: np.ndarray
    frenet_minus: np.ndarray
    nodes_plus: np.ndarray
    weights_plus: np.ndarray
    frenet_plus: np.ndarray


def _sign(curve, pts):
    s = np.asarray(curve.side(pts[..., 0], pts[..., 1]), dtype=float)
    return np.where(s > 0, 1, -1).astype(int)


def _bisect_crossing(curve, va, vb, lo, hi, s_lo):
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if _sign(curve, va + mid * (vb - va)) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_edge_intersections(curve: CurveDescriptor, vertices, xi_guess: float,
                            n_samples: int = 8,
                            element_id: int = -1) -> CutTopology:
    """Locate the two edge crossings and split the element into regions."""
    verts = np.asarray(vertices, dtype=float)
    crossings = []
    for e in range(4):
        va, vb = verts[e], verts[(e + 1) % 4]
        t = np.linspace(0.0, 1.0, n_samples + 2)
        s = _sign(curve, va[None, :] + t[:, None] * (vb - va)[None, :])
        for a in range(len(t) - 1):
            if s[a] != s[a + 1]:
                tc = _bisect_crossing(curve, va, vb, t[a], t[a + 1], s[a])
                crossings.append((e, tc, va + tc * (vb - va)))

    if len(crossings) != 2:
        raise CutTopologyError(
            f"element {element_id}: expected 2 edge crossings, "
            f"found {len(crossings)}")
    (e1, t1, p1), (e2, t2, p2) = crossings
    if e1 == e2:
        raise CutTopologyError(
            f"element {element_id}: both crossings on edge {e1} "
            "(unsupported same-edge cut)")
    kind = "opposite" if abs(e1 - e2) == 2 else "adjacent"

    pts = np.array([p1, p2])
    _, xi, _, _ = inverse_map_batch(curve, pts, xi_guess)
    tg = np.array([e1 + t1, e2 + t2])

    # walk the boundary counterclockwise between the two crossings
    order = np.argsort(tg)
    tg_lo, tg_hi = tg[order]
    p_lo, p_hi = pts[order]
    xi_lo, xi_hi = xi[order]
    inner = [k for k in range(4) if tg_lo < k < tg_hi]
    outer = sorted((k for k in range(4) if not tg_lo < k < tg_hi),
                   key=lambda k: (k - tg_hi) % 4)

    regions = []
    for chain, corners, a_from, a_to in (
            ([p_lo] + [verts[k] for k in inner] + [p_hi], inner, xi_hi, xi_lo),
            ([p_hi] + [verts[k] for k in outer] + [p_lo], outer, xi_lo, xi_hi)):
        if not corners:
            raise CutTopologyError(
                f"element {element_id}: crossing through a vertex")
        csign = _sign(curve, verts[np.array(corners)])
        if csign.min() != csign.max():
            raise CutTopologyError(
                f"element {element_id}: inconsistent corner signs")
        regions.append(CutRegion(int(csign[0]), np.asarray(chain),
                                 float(a_from), float(a_to), tuple(corners)))
    if regions[0].side == regions[1].side:
        raise CutTopologyError(
            f"element {element_id}: both sub-regions on the same side")
    minus, plus = sorted(regions, key=lambda r: r.side)

    entry, exit_ = (0, 1) if xi[0] < xi[1] else (1, 0)
    return CutTopology(
        kind=kind,
        entry_edge=int(crossings[entry][0]), exit_edge=int(crossings[exit_][0]),
        entry_point=pts[entry], exit_point=pts[exit_],
        xi_entry=float(xi[entry]), xi_exit=float(xi[exit_]),
        region_minus=minus, region_plus=plus)


def _straight_triangle(rule, a, b, c, scale2):
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if abs(det) <= _DEGENERATE_REL * scale2:
        return None
    u = rule.nodes[:, 0:1]
    v = rule.nodes[:, 1:2]
    nodes = a[None, :] + u * (b - a)[None, :] + v * (c - a)[None, :]
    return nodes, rule.weights * abs(det)


def _curved_triangle(curve, rule, a, xi_a, xi_b, scale2, element_id):
    n = rule.ray.size
    t = np.tile(rule.cross, n)
    w = np.repeat(rule.ray, n)
    dxi = xi_b - xi_a
    xi_t = xi_a + t * dxi
    gt = np.asarray(curve.g(xi_t), dtype=float)
    dgt = np.asarray(curve.dg(xi_t), dtype=float)
    rel = gt - a[None, :]
    det = dxi * (rel[:, 0] * dgt[:, 1] - rel[:, 1] * dgt[:, 0])
    if np.max(np.abs(det)) <= _DEGENERATE_REL * scale2:
        return None
    if det.max() > 0 and det.min() < 0:
        raise CutTopologyError(
            f"element {element_id}: folded blending map on curved triangle")
    nodes = (1.0 - w)[:, None] * a[None, :] + w[:, None] * gt
    return nodes, rule.weights * np.abs(det)


def _transfinite_quad(curve, n_qp, chain, xi_first, xi_last, element_id):
    p_first, ca, cb, p_last = chain
    gl = gauss_legendre(n_qp)
    u = 0.5 * (1.0 + gl.nodes)
    wu = 0.5 * gl.weights
    uu, vv = np.meshgrid(u, u, indexing='ij')
    dxi = xi_last - xi_first
    xi_u = xi_first + u * dxi
    top = np.asarray(curve.g(xi_u), dtype=float)
    dtop = np.asarray(curve.dg(xi_u), dtype=float)
    bot = ca[None, :] + u[:, None] * (cb - ca)[None, :]

    nodes = (1.0 - vv)[..., None] * bot[:, None, :] \
        + vv[..., None] * top[:, None, :]
    fu = (1.0 - vv)[..., None] * (cb - ca)[None, None, :] \
        + vv[..., None] * (dxi * dtop)[:, None, :]
    fv = (top - bot)[:, None, :] * np.ones_like(vv)[..., None]
    det = fu[..., 0] * fv[..., 1] - fu[..., 1] * fv[..., 0]
    if det.max() > 0 and det.min() < 0:
        raise CutTopologyError(
            f"element {element_id}: folded transfinite map")
    weights = np.outer(wu, wu) * np.abs(det)
    return nodes.reshape(-1, 2), weights.ravel()


def _region_rule(curve, region: CutRegion, kind: str, n_qp: int,
                 scale2: float, element_id: int):
    if kind == "adjacent":
        rule = stroud_triangle(n_qp)
        anchor = region.polygon.mean(axis=0)
        parts = []
        for i in range(len(region.polygon) - 1):
            piece = _straight_triangle(rule, anchor, region.polygon[i],
                                       region.polygon[i + 1], scale2)
            if piece is not None:
                parts.append(piece)
        curved = _curved_triangle(curve, rule, anchor,
                                  region.arc_from, region.arc_to,
                                  scale2, element_id)
        if curved is not None:
            parts.append(curved)
        if not parts:
            raise CutTopologyError(
                f"element {element_id}: sub-region degenerated entirely")
        return (np.vstack([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]))
    if len(region.polygon) != 4:
        raise CutTopologyError(
            f"element {element_id}: opposite cut with "
            f"{len(region.polygon) - 2} corners in one region")
    return _transfinite_quad(curve, n_qp, region.polygon,
                             region.arc_to, region.arc_from, element_id)


def cut_quadrature(curve: CurveDescriptor, topo: CutTopology, n_qp: int,
                   xi_guess: float, element_id: int = -1) -> CutQuadrature:
    """Positive-weight quadrature for both sides of a cut element."""
    if n_qp < 1:
        raise ValueError("need at least one node per direction")
    span = np.vstack([topo.region_minus.polygon, topo.region_plus.polygon])
    scale2 = float(np.prod(span.max(axis=0) - span.min(axis=0)) + 1e-300)

    out = {}
    for region in (topo.region_minus, topo.region_plus):
        nodes, weights = _region_rule(curve, region, topo.kind, n_qp,
                                      scale2, element_id)
        eta, xi, _, _ = inverse_map_batch(curve, nodes, xi_guess)
        out[region.side] = (nodes, weights, np.column_stack((eta, xi)))
    return CutQuadrature(*out[-1], *out[1])
