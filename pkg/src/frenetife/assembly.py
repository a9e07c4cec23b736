"""Element-level assembly and L2 projection.

Evaluates the local R family at quadrature images, assembles weighted
mass matrices and load vectors, and runs the piecewise projection: tensor
Legendre on uncut rectangles, the jump-condition basis on cut elements.
The convergence driver sweeps degrees and mesh sizes and reports global
errors with observed rates.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from functools import partial
from math import cos, pi

import numpy as np
import scipy.linalg

from . import _kernels
from .curve import CurveDescriptor
from .cutquad import (CutQuadrature, CutTopology, cut_quadrature,
                      find_edge_intersections)
from .errors import FrenetIFEError
from .frenet import inverse_map_batch, physical_gradient
from .ifebasis import (BasisCoefficients, JumpSystem, initial_basis,
                       jump_system, reconstruct)
from .mesh import (LABEL_INTERFACE, CartesianMesh, FrenetElementInfo,
                   build_mesh, classify_elements, default_sample_count,
                   element_info_from_vertices, xi_init_guess)
from .polyquad import gauss_legendre


@dataclass(frozen=True)
class VandermondeSet:
    """R-family values at the cut-quadrature nodes, one block per side."""

    values_minus: np.ndarray
    values_plus: np.ndarray
    d_eta_minus: np.ndarray | None = None
    d_eta_plus: np.ndarray | None = None
    d_xi_minus: np.ndarray | None = None
    d_xi_plus: np.ndarray | None = None


def vandermonde(m: int, info: FrenetElementInfo, eta, xi,
                d_eta: int = 0, d_xi: int = 0) -> np.ndarray:
    """Evaluate derivatives of the scaled tensor family q_t p_s.

    Row k holds all (m+1)^2 members, column index t*(m+1)+s, at the tube
    point (eta[k], xi[k]); chain-rule powers of eta_h and xi_h included.
    """
    eta = np.asarray(eta, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float).ravel()
    eta_ref = eta / info.eta_h
    xi_ref = (xi - info.xi_mid) / info.xi_h
    q = _kernels.q_table(m, d_eta, eta_ref)[:, d_eta, :] / info.eta_h ** d_eta
    p = _kernels.legendre_table(m, d_xi, xi_ref)[:, d_xi, :] \
        / info.xi_h ** d_xi
    n = m + 1
    return np.einsum('tk,sk->kts', q, p).reshape(eta.size, n * n)


def vandermonde_set(m: int, info: FrenetElementInfo, cutq: CutQuadrature,
                    with_derivatives: bool = False) -> VandermondeSet:
    fm, fp = cutq.frenet_minus, cutq.frenet_plus
    vm = vandermonde(m, info, fm[:, 0], fm[:, 1])
    vp = vandermonde(m, info, fp[:, 0], fp[:, 1])
    if not with_derivatives:
        return VandermondeSet(vm, vp)
    return VandermondeSet(
        vm, vp,
        vandermonde(m, info, fm[:, 0], fm[:, 1], d_eta=1),
        vandermonde(m, info, fp[:, 0], fp[:, 1], d_eta=1),
        vandermonde(m, info, fm[:, 0], fm[:, 1], d_xi=1),
        vandermonde(m, info, fp[:, 0], fp[:, 1], d_xi=1))


def mass_matrix(coeffs: BasisCoefficients, vset: VandermondeSet,
                cutq: CutQuadrature) -> np.ndarray:
    vm = vset.values_minus @ coeffs.c_minus
    vp = vset.values_plus @ coeffs.c_plus
    return vm.T @ (cutq.weights_minus[:, None] * vm) \
        + vp.T @ (cutq.weights_plus[:, None] * vp)


def load_vector(field_fn, coeffs: BasisCoefficients, vset: VandermondeSet,
                cutq: CutQuadrature) -> np.ndarray:
    um = side_values(field_fn, cutq.nodes_minus, "minus")
    up = side_values(field_fn, cutq.nodes_plus, "plus")
    vm = vset.values_minus @ coeffs.c_minus
    vp = vset.values_plus @ coeffs.c_plus
    return vm.T @ (cutq.weights_minus * um) + vp.T @ (cutq.weights_plus * up)


def side_values(field_fn, nodes, side: str) -> np.ndarray:
    """Evaluate a field on one side, honouring per-side branches if any.

    Cut-quadrature nodes can land a rounding error across the interface;
    fields exposing ``minus``/``plus`` methods are evaluated on the
    analytic branch of their side instead of by position.
    """
    nodes = np.asarray(nodes, dtype=float)
    branch = getattr(field_fn, side, None)
    fn = branch if branch is not None else field_fn
    return np.asarray(fn(nodes[:, 0], nodes[:, 1]), dtype=float).ravel()


def basis_eval(coeffs: BasisCoefficients, column: int, points,
               curve: CurveDescriptor, info: FrenetElementInfo,
               grad: bool = False):
    """One basis function (or its gradient) at physical points.

    The side of each point picks the coefficient column; values on the
    interface itself use the minus side, consistent with element
    classification.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eta, xi, _, _ = inverse_map_batch(curve, points, info.xi_guess)
    minus = np.asarray(curve.side(points[:, 0], points[:, 1]),
                       dtype=float) <= 0
    cm = coeffs.c_minus[:, column]
    cp = coeffs.c_plus[:, column]
    if not grad:
        v = vandermonde(coeffs.degree, info, eta, xi)
        return np.where(minus, v @ cm, v @ cp)
    ve = vandermonde(coeffs.degree, info, eta, xi, d_eta=1)
    vx = vandermonde(coeffs.degree, info, eta, xi, d_xi=1)
    du_eta = np.where(minus, ve @ cm, ve @ cp)
    du_xi = np.where(minus, vx @ cm, vx @ cp)
    return physical_gradient(curve, eta, xi, du_eta, du_xi)


@dataclass(frozen=True)
class MatchedRadialCosine:
    """Radial cosine field whose jumps all vanish on the circle r = radius.

    Outside: cos(2 pi r^2)/beta_plus.  Inside the same profile scaled by
    1/beta_minus, shifted by a constant so the trace is continuous; the
    scaling makes every beta-weighted normal derivative continuous too.
    """

    radius: float
    beta_minus: float
    beta_plus: float
    center: tuple = (0.0, 0.0)

    def _r2(self, x, y):
        return (np.asarray(x, dtype=float) - self.center[0]) ** 2 \
            + (np.asarray(y, dtype=float) - self.center[1]) ** 2

    def minus(self, x, y):
        shift = cos(2.0 * pi * self.radius ** 2) \
            * (1.0 / self.beta_plus - 1.0 / self.beta_minus)
        return np.cos(2.0 * pi * self._r2(x, y)) / self.beta_minus + shift

    def plus(self, x, y):
        return np.cos(2.0 * pi * self._r2(x, y)) / self.beta_plus

    def __call__(self, x, y):
        return np.where(self._r2(x, y) > self.radius ** 2,
                        self.plus(x, y), self.minus(x, y))


@dataclass(frozen=True)
class InterfaceElementBasis:
    """Everything built for one cut element at one degree."""

    info: FrenetElementInfo
    quad: CutQuadrature
    system: JumpSystem
    basis: BasisCoefficients
    vset: VandermondeSet
    topo: CutTopology


def build_element_basis(curve: CurveDescriptor, vertices, m: int, betas,
                        xi_guess: float, element_id: int = -1,
                        n_qp: int | None = None, n_line: int | None = None,
                        construction: str = "special",
                        precond: str = "rownorm",
                        reconstruct_mode: str = "vandermonde",
                        min_sv_ratio: float = 1e-14,
                        with_derivatives: bool = False) -> InterfaceElementBasis:
    """Full single-element pipeline from vertices to a usable basis."""
    if n_qp is None:
        n_qp = m + 1
    info = element_info_from_vertices(curve, vertices, xi_guess, element_id)
    topo = find_edge_intersections(curve, vertices, info.xi_guess,
                                   element_id=element_id)
    cutq = cut_quadrature(curve, topo, n_qp, info.xi_guess, element_id)
    system = jump_system(curve, info, m, n_line)
    basis = initial_basis(system, betas, construction, precond)
    vset = vandermonde_set(m, info, cutq, with_derivatives)
    if reconstruct_mode != "none":
        basis = reconstruct(basis, vset.values_minus, cutq.weights_minus,
                            vset.values_plus, cutq.weights_plus,
                            approach=reconstruct_mode,
                            min_sv_ratio=min_sv_ratio)
    return InterfaceElementBasis(info, cutq, system, basis, vset, topo)


def stacked_root_factor(basis: BasisCoefficients, vset: VandermondeSet,
                        cutq: CutQuadrature) -> np.ndarray:
    """Root-weighted basis values B with B^T B the element mass matrix.

    Condition numbers of graded mass matrices are read off as cond(B)^2,
    which stays accurate long after a dense SVD of B^T B has drowned the
    small eigenvalues in roundoff.
    """
    return np.vstack((
        np.sqrt(cutq.weights_minus)[:, None]
        * (vset.values_minus @ basis.c_minus),
        np.sqrt(cutq.weights_plus)[:, None]
        * (vset.values_plus @ basis.c_plus)))


def mass_condition_numbers(curve: CurveDescriptor, vertices, m: int, betas,
                           xi_guess: float, n_qp: int | None = None,
                           construction: str = "special",
                           precond: str = "rownorm") -> tuple:
    """Mass-matrix condition before and after both reconstructions.

    The default rule is denser than the projection default because the
    graded matrices keep shifting under refinement well past m + 2
    points; 16 per direction is converged through m = 10.
    """
    if n_qp is None:
        n_qp = max(m + 2, 16)
    built = build_element_basis(curve, vertices, m, betas, xi_guess,
                                n_qp=n_qp, construction=construction,
                                precond=precond, reconstruct_mode="none")
    conds = [np.linalg.cond(
        stacked_root_factor(built.basis, built.vset, built.quad)) ** 2]
    for approach in ("mass", "vandermonde"):
        rec = reconstruct(built.basis, built.vset.values_minus,
                          built.quad.weights_minus, built.vset.values_plus,
                          built.quad.weights_plus, approach=approach,
                          min_sv_ratio=0.0)
        conds.append(np.linalg.cond(
            stacked_root_factor(rec, built.vset, built.quad)) ** 2)
    return tuple(float(c) for c in conds)


def project_interface_element(field_fn, basis: BasisCoefficients,
                              vset: VandermondeSet, cutq: CutQuadrature,
                              vset_err: VandermondeSet | None = None,
                              cutq_err: CutQuadrature | None = None):
    """Weighted least-squares fit on a cut element; returns (coef, err^2).

    The residual is integrated on (vset_err, cutq_err) when given.  With
    the minimal solve rule the fit interpolates at its own nodes and the
    sampled residual collapses, so error measurement needs more points
    than the solve.
    """
    um = side_values(field_fn, cutq.nodes_minus, "minus")
    up = side_values(field_fn, cutq.nodes_plus, "plus")
    vm = vset.values_minus @ basis.c_minus
    vp = vset.values_plus @ basis.c_plus
    mass = vm.T @ (cutq.weights_minus[:, None] * vm) \
        + vp.T @ (cutq.weights_plus[:, None] * vp)
    rhs = vm.T @ (cutq.weights_minus * um) + vp.T @ (cutq.weights_plus * up)
    coef = scipy.linalg.solve(mass, rhs, assume_a="sym")
    if vset_err is not None and cutq_err is not None:
        um = side_values(field_fn, cutq_err.nodes_minus, "minus")
        up = side_values(field_fn, cutq_err.nodes_plus, "plus")
        vm = vset_err.values_minus @ basis.c_minus
        vp = vset_err.values_plus @ basis.c_plus
        cutq = cutq_err
    err2 = float((cutq.weights_minus * (vm @ coef - um) ** 2).sum()
                 + (cutq.weights_plus * (vp @ coef - up) ** 2).sum())
    return coef, err2


def _tensor_reference(m: int, n_qp: int):
    """Shared tensor-Legendre evaluation table on the reference square."""
    rule = gauss_legendre(n_qp)
    p = _kernels.legendre_table(m, 0, rule.nodes)[:, 0, :]
    vand = np.einsum('ia,jb->abij', p, p).reshape(n_qp * n_qp, (m + 1) ** 2)
    weights = np.outer(rule.weights, rule.weights).ravel()
    zx = np.repeat(rule.nodes, n_qp)
    zy = np.tile(rule.nodes, n_qp)
    norms = 2.0 / (2.0 * np.arange(m + 1) + 1.0)
    diag = np.outer(norms, norms).ravel()
    return vand, weights, zx, zy, diag


def project_plain_elements(field_fn, mesh: CartesianMesh, element_ids,
                           m: int, n_qp: int, n_qp_err: int | None = None):
    """Diagonal-mass tensor projection on uncut rectangles, batched.

    Returns per-element coefficient rows and squared errors.  The x,y
    scaling of the mass matrix cancels against the load, so coefficients
    come straight from the reference-square norms.  Residuals are summed
    on a rule of n_qp_err points per direction; at the minimal solve
    rule the fit passes through its own nodes and the sampled error
    would be spuriously zero.
    """
    element_ids = np.asarray(element_ids, dtype=np.intp)
    vand, weights, zx, zy, diag = _tensor_reference(m, n_qp)
    hx2, hy2 = 0.5 * mesh.dx, 0.5 * mesh.dy
    centers = mesh.vertices[mesh.elements[element_ids, 0]] \
        + np.array([hx2, hy2])
    xs = centers[:, 0, None] + hx2 * zx[None, :]
    ys = centers[:, 1, None] + hy2 * zy[None, :]
    u = np.asarray(field_fn(xs, ys), dtype=float)
    coef = ((u * weights) @ vand) / diag[None, :]
    if n_qp_err is not None and n_qp_err != n_qp:
        vand, weights, zx, zy, _ = _tensor_reference(m, n_qp_err)
        xs = centers[:, 0, None] + hx2 * zx[None, :]
        ys = centers[:, 1, None] + hy2 * zy[None, :]
        u = np.asarray(field_fn(xs, ys), dtype=float)
    resid = coef @ vand.T - u
    err2 = hx2 * hy2 * ((resid ** 2) * weights).sum(axis=1)
    return coef, err2


def _interface_job(curve, field_fn, m, betas, n_qp, n_qp_err, construction,
                   precond, reconstruct_mode, min_sv_ratio,
                   keep_coefficients, task):
    elem_id, vertices, xi_guess = task
    built = build_element_basis(curve, vertices, m, betas, xi_guess,
                                element_id=elem_id, n_qp=n_qp,
                                construction=construction, precond=precond,
                                reconstruct_mode=reconstruct_mode,
                                min_sv_ratio=min_sv_ratio)
    vset_err = cutq_err = None
    if n_qp_err is not None and n_qp_err != n_qp:
        cutq_err = cut_quadrature(curve, built.topo, n_qp_err,
                                  built.info.xi_guess, elem_id)
        vset_err = vandermonde_set(m, built.info, cutq_err)
    coef, err2 = project_interface_element(field_fn, built.basis, built.vset,
                                           built.quad, vset_err, cutq_err)
    return elem_id, err2, coef if keep_coefficients else None


def project_element(field_fn, curve: CurveDescriptor, mesh: CartesianMesh,
                    elem_id: int, m: int, betas=(1.0, 1.0),
                    label: int | None = None, n_qp: int | None = None,
                    n_qp_err: int | None = None, **basis_options):
    """Project a field on a single element of either kind.

    Convenience path for inspection and spot checks; the sweep drivers
    batch these operations instead.  Returns (coefficients, L2 error).
    """
    if label is None:
        label = int(classify_elements(mesh, curve)[elem_id])
    if n_qp is None:
        n_qp = m + 1
    if n_qp_err is None:
        n_qp_err = n_qp + 2
    if label != LABEL_INTERFACE:
        coef, err2 = project_plain_elements(field_fn, mesh, [elem_id], m,
                                            n_qp, n_qp_err)
        return coef[0], float(np.sqrt(err2[0]))
    guess = xi_init_guess(curve, mesh.element_center(elem_id),
                          default_sample_count(mesh.diameter))
    built = build_element_basis(curve, mesh.element_vertices(elem_id), m,
                                betas, guess, element_id=elem_id, n_qp=n_qp,
                                **basis_options)
    cutq_err = cut_quadrature(curve, built.topo, n_qp_err,
                              built.info.xi_guess, elem_id)
    vset_err = vandermonde_set(m, built.info, cutq_err)
    coef, err2 = project_interface_element(field_fn, built.basis, built.vset,
                                           built.quad, vset_err, cutq_err)
    return coef, float(np.sqrt(err2))


@dataclass(frozen=True)
class ProjectionResult:
    """Global errors and observed rates over a (degree, mesh-size) grid.

    ``element_errors[(m, n)]`` maps element id to that element's L2
    error; ``coefficients`` is filled only on request.  ``rates[i, 0]``
    is NaN since the first mesh has no predecessor.
    """

    degrees: tuple
    mesh_sizes: tuple
    errors: np.ndarray
    rates: np.ndarray
    element_errors: dict
    coefficients: dict = field(default_factory=dict)

    def error(self, m: int, n: int) -> float:
        return float(self.errors[self.degrees.index(m),
                                 self.mesh_sizes.index(n)])

    def rate(self, m: int, n: int) -> float:
        return float(self.rates[self.degrees.index(m),
                                self.mesh_sizes.index(n)])


def global_projection_study(curve: CurveDescriptor, field_fn, betas,
                            degrees, mesh_sizes, bounds=(-1.0, 1.0, -1.0, 1.0),
                            n_qp: int | None = None,
                            n_qp_err: int | None = None,
                            construction: str = "special",
                            precond: str = "rownorm",
                            reconstruct_mode: str = "vandermonde",
                            min_sv_ratio: float = 1e-14, jobs: int = 1,
                            keep_coefficients: bool = False) -> ProjectionResult:
    """Sweep the L2 projection over degrees and meshes, with rates."""
    degrees = tuple(int(m) for m in degrees)
    mesh_sizes = tuple(int(n) for n in mesh_sizes)
    errors = np.zeros((len(degrees), len(mesh_sizes)))
    element_errors = {}
    coefficients = {}
    pool = None
    if jobs > 1:
        pool = concurrent.futures.ProcessPoolExecutor(max_workers=jobs)
    try:
        for jn, n in enumerate(mesh_sizes):
            mesh = build_mesh(n, bounds)
            labels = classify_elements(mesh, curve)
            cut_ids = np.flatnonzero(labels == LABEL_INTERFACE)
            plain_ids = np.flatnonzero(labels != LABEL_INTERFACE)
            centers = mesh.vertices[mesh.elements[cut_ids]].mean(axis=1)
            guesses = xi_init_guess(curve, centers,
                                    default_sample_count(mesh.diameter))
            guesses = np.atleast_1d(guesses)
            tasks = [(int(e), mesh.element_vertices(int(e)), float(g))
                     for e, g in zip(cut_ids, guesses)]
            for im, m in enumerate(degrees):
                nq = n_qp if n_qp is not None else m + 1
                nq_err = n_qp_err if n_qp_err is not None else nq + 2
                job = partial(_interface_job, curve, field_fn, m, betas, nq,
                              nq_err, construction, precond, reconstruct_mode,
                              min_sv_ratio, keep_coefficients)
                runner = pool.map if pool is not None else map
                per_elem = np.zeros(mesh.n_elements)
                coef_plain, err2_plain = project_plain_elements(
                    field_fn, mesh, plain_ids, m, nq, nq_err)
                per_elem[plain_ids] = err2_plain
                for elem_id, err2, coef in runner(job, tasks):
                    per_elem[elem_id] = err2
                    if keep_coefficients:
                        coefficients[(m, n, elem_id)] = coef
                if keep_coefficients:
                    for row, e in zip(coef_plain, plain_ids):
                        coefficients[(m, n, int(e))] = row
                element_errors[(m, n)] = np.sqrt(per_elem)
                errors[im, jn] = np.sqrt(per_elem.sum())
    finally:
        if pool is not None:
            pool.shutdown()
    rates = np.full_like(errors, np.nan)
    for j in range(1, len(mesh_sizes)):
        step = np.log(mesh_sizes[j] / mesh_sizes[j - 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            rates[:, j] = np.log(errors[:, j - 1] / errors[:, j]) / step
    return ProjectionResult(degrees, mesh_sizes, errors, rates,
                            element_errors, coefficients)
