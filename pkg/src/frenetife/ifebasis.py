"""Interface-element polynomial bases satisfying the jump conditions.

On an interface element the local space is spanned on each side by the
tensor family ``R_{(m+1)t+s+1}(eta, xi) = q_t(eta/eta_h) p_s(xi~)`` with
``xi~ = (xi - xi_mid)/xi_h``; a basis is a pair of coefficient matrices
``(C-, C+)`` against that family.  Admissible pairs satisfy, weakly
against degree-m Legendre test polynomials on the interface line,

* continuity of the trace,
* continuity of ``beta u_eta``,
* continuity of ``beta`` times normal derivatives of the transformed
  Laplacian up to order m-2,

which collectively read ``At C+ = J At C-`` with the square jump matrix
``At`` and diagonal scaling ``J``.  Two constructions are provided (the
flux-scaled special pair with a polynomial-extension solve, and
extension of an identity basis through ``At``), plus SVD-based
orthonormalization of the result in the weighted element metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import _kernels
from .curve import CurveDescriptor, curvature_derivative, frenet_apparatus
from .errors import RankDeficiencyError
from .mesh import FrenetElementInfo
from .polyquad import gauss_legendre, pipk_values, qi_values

DEFAULT_LINE_NODES_EXTRA = 2     # line rule size m + 2 unless overridden


@dataclass(frozen=True)
class JDerivTable:
    """Normal derivatives of the metric factors J0, J1, J2 on the line.

    ``values[l, c, r]`` is the l-th eta-derivative of J_c at
    ``(0, xi[r])``, from the closed forms

        d^l J0 = (-1)^l (l+1)! kappa^l / |g'|^2
        d^l J1 = (-1)^l l! kappa^(l+1)
        d^l J2 = -(kappa'/|g'|^2) l (-1)^(l-1) ((l+1)!/2) kappa^(l-1)
                 - (g'.g''/|g'|^4) (-1)^l (l+1)! kappa^l.
    """

    values: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class JumpSystem:
    """Assembled jump matrices of one element at one degree."""

    m: int
    atilde: np.ndarray           # ((m+1)^2, (m+1)^2)
    a_stack: np.ndarray          # ((m-1)(m+1), m^2 - 1)
    b_stack: np.ndarray          # ((m-1)(m+1), m+1), column i = b(i)
    info: FrenetElementInfo
    n_line: int


@dataclass(frozen=True)
class BasisCoefficients:
    """Coefficients of the local basis against the R family, per side."""

    degree: int
    c_minus: np.ndarray
    c_plus: np.ndarray


@dataclass(frozen=True)
class JumpResidual:
    """Normalized worst-case defect of each basis function per condition."""

    continuity: np.ndarray
    flux: np.ndarray
    extended: np.ndarray

    def worst(self) -> float:
        return float(max(self.continuity.max(), self.flux.max(),
                         self.extended.max() if self.extended.size else 0.0))


def j_deriv_table(curve: CurveDescriptor, m: int, xi_nodes) -> JDerivTable:
    xi_nodes = np.asarray(xi_nodes, dtype=float)
    ap = frenet_apparatus(curve, xi_nodes)
    kprime = curvature_derivative(curve, xi_nodes)
    gd = np.asarray(curve.dg(xi_nodes), dtype=float)
    gdd = np.asarray(curve.ddg(xi_nodes), dtype=float)
    dot = np.einsum('ij,ij->i', gd, gdd)
    speed2 = ap.speed ** 2
    k = ap.curvature
    rows = max(m - 1, 0)
    vals = np.zeros((rows, 3, xi_nodes.size))
    for l in range(rows):
        sgn = (-1.0) ** l
        vals[l, 0] = sgn * factorial(l + 1) * k ** l / speed2
        vals[l, 1] = sgn * factorial(l) * k ** (l + 1)
        vals[l, 2] = -(dot / speed2 ** 2) * sgn * factorial(l + 1) * k ** l
        if l > 0:
            vals[l, 2] -= (kprime / speed2) * (l * (-1.0) ** (l - 1)
                                               * (factorial(l + 1) / 2.0)
                                               * k ** (l - 1))
    return JDerivTable(vals, xi_nodes)


def b_vector(i: int, j: int, table: JDerivTable, pipk, xi_h: float, weights):
    """Weak transformed Laplacian of the along-curve polynomial p_i."""
    return _kernels.b_vec(i, j, table.values, pipk, xi_h, weights)


def a_matrix(j: int, m: int, table: JDerivTable, pipk, q0,
             eta_h: float, xi_h: float, weights):
    """Block j of the polynomial-extension system (columns t >= 2)."""
    return _kernels.a_block(j, m, table.values, pipk, q0, eta_h, xi_h,
                            weights)


def assemble_atilde(m: int, table: JDerivTable, pipk, q0,
                    eta_h: float, xi_h: float, weights):
    """Collective jump matrix: trace and flux rows, then extended blocks."""
    return _kernels.atilde(m, table.values, pipk, q0, eta_h, xi_h, weights)


def jump_system(curve: CurveDescriptor, info: FrenetElementInfo, m: int,
                n_line: int | None = None) -> JumpSystem:
    """Assemble all jump matrices of one element on an m+2 point line rule."""
    if m < 1:
        raise ValueError("degree must be at least 1")
    if n_line is None:
        n_line = m + DEFAULT_LINE_NODES_EXTRA
    rule = gauss_legendre(n_line)
    zetas = info.xi_mid + info.xi_h * rule.nodes
    table = j_deriv_table(curve, m, zetas)
    pipk = pipk_values(m, n_line)
    q0 = qi_values(m)
    at = assemble_atilde(m, table, pipk, q0, info.eta_h, info.xi_h,
                         rule.weights)
    if m == 1:
        a_stack = np.zeros((0, 0))
        b_stack = np.zeros((0, m + 1))
    else:
        a_stack = np.vstack([
            a_matrix(j, m, table, pipk, q0, info.eta_h, info.xi_h,
                     rule.weights)
            for j in range(m - 1)])
        b_stack = np.column_stack([
            np.concatenate([
                b_vector(i, j, table, pipk, info.xi_h, rule.weights)
                for j in range(m - 1)])
            for i in range(m + 1)])
    return JumpSystem(m, at, a_stack, b_stack, info, n_line)


def precondition_rows(mat: np.ndarray, kind: str):
    """Row scaling D^{-1} mat for the two diagonal preconditioners."""
    if kind == "rownorm":
        d = np.linalg.norm(mat, axis=1)
    elif kind == "jacobi":
        d = np.diagonal(mat).copy()
    else:
        raise ValueError(f"unknown preconditioner {kind!r}")
    if mat.size and not np.all(np.abs(d) > 0):
        raise RankDeficiencyError(f"{kind} preconditioner met a zero scale")
    return mat / d[:, None], d


def jump_scaling_diagonal(m: int, beta_minus: float, beta_plus: float):
    """Diagonal of J: ones on the trace rows, beta-/beta+ elsewhere."""
    n = m + 1
    diag = np.full(n * n, beta_minus / beta_plus)
    diag[:n] = 1.0
    return diag


def solve_special_coeffs(system: JumpSystem, betas,
                         precond: str = "rownorm") -> np.ndarray:
    """Correction coefficients of the trace block of the special basis.

    Column i solves ``A c = ((beta- - beta+)/beta+) b(i)`` row-scaled by
    the chosen preconditioner; shape (m^2 - 1, m + 1).
    """
    m = system.m
    if m == 1:
        return np.zeros((0, 2))
    beta_minus, beta_plus = betas
    scaled, d = precondition_rows(system.a_stack, precond)
    rhs = ((beta_minus - beta_plus) / beta_plus) * system.b_stack \
        / d[:, None]
    return np.linalg.solve(scaled, rhs)


def special_initial_basis(m: int, coeffs: np.ndarray,
                          betas) -> BasisCoefficients:
    """Flux-scaled basis: trace block plus 1/beta-scaled normal block.

    The minus side is block diagonal (identity on the trace block,
    ``1/beta-`` on the rest); the plus side additionally carries the
    correction columns from :func:`solve_special_coeffs`.
    """
    beta_minus, beta_plus = betas
    n = m + 1
    nn = n * n
    c_minus = np.eye(nn)
    c_minus[n:, n:] /= beta_minus
    c_plus = np.eye(nn)
    c_plus[n:, n:] /= beta_plus
    c_plus[2 * n:, :n] = coeffs
    return BasisCoefficients(m, c_minus, c_plus)


def extend_basis(system: JumpSystem, betas, known: np.ndarray,
                 known_side: str, precond: str = "rownorm") -> BasisCoefficients:
    """Complete a one-sided coefficient matrix through ``At C+ = J At C-``."""
    jd = jump_scaling_diagonal(system.m, *betas)
    at = system.atilde
    if known_side == "minus":
        lhs, rhs = at, (jd[:, None] * at) @ known
    elif known_side == "plus":
        lhs, rhs = jd[:, None] * at, at @ known
    else:
        raise ValueError(f"unknown side {known_side!r}")
    scaled, d = precondition_rows(lhs, precond)
    other = np.linalg.solve(scaled, rhs / d[:, None])
    if known_side == "minus":
        return BasisCoefficients(system.m, known, other)
    return BasisCoefficients(system.m, other, known)


def initial_basis(system: JumpSystem, betas, construction: str = "special",
                  precond: str = "rownorm",
                  identity_side: str = "plus") -> BasisCoefficients:
    """Either construction of an admissible starting basis."""
    if construction == "special":
        c = solve_special_coeffs(system, betas, precond)
        return special_initial_basis(system.m, c, betas)
    if construction == "extend":
        eye = np.eye((system.m + 1) ** 2)
        return extend_basis(system, betas, eye, identity_side, precond)
    raise ValueError(f"unknown construction {construction!r}")


def jump_residual(coeffs: BasisCoefficients, curve: CurveDescriptor,
                  info: FrenetElementInfo, betas,
                  n_line: int | None = None) -> JumpResidual:
    """Re-assemble the jump matrices and measure ``At C+ - J At C-``.

    The line rule is one node denser than the construction default so the
    check does not reuse the construction's own quadrature.  Rows are
    normalized by the row norms of (the worse of) ``At`` and ``J At``,
    columns by the basis function's coefficient norm.
    """
    m = coeffs.degree
    if n_line is None:
        n_line = m + DEFAULT_LINE_NODES_EXTRA + 1
    system = jump_system(curve, info, m, n_line=n_line)
    jd = jump_scaling_diagonal(m, *betas)
    defect = system.atilde @ coeffs.c_plus \
        - jd[:, None] * (system.atilde @ coeffs.c_minus)
    row_scale = np.linalg.norm(system.atilde, axis=1) * np.maximum(1.0, jd)
    col_scale = np.sqrt(np.linalg.norm(coeffs.c_minus, axis=0) ** 2
                        + np.linalg.norm(coeffs.c_plus, axis=0) ** 2)
    rel = np.abs(defect) / row_scale[:, None] / col_scale[None, :]
    n = m + 1
    extended = rel[2 * n:].max(axis=0) if m >= 2 else np.zeros(n * n)
    return JumpResidual(rel[:n].max(axis=0), rel[n:2 * n].max(axis=0),
                        extended)


def _fix_signs(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive."""
    idx = np.argmax(np.abs(v), axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    out = v.copy()
    out[:, flip] *= -1.0
    return out


def reconstruct(coeffs: BasisCoefficients, l_minus, w_minus, l_plus, w_plus,
                approach: str = "vandermonde",
                min_sv_ratio: float = 1e-14) -> BasisCoefficients:
    """Orthonormalize the basis in the weighted element inner product.

    ``l_minus``/``l_plus`` are Vandermonde matrices of the R family at
    the cut-quadrature nodes of each side.  ``mass`` diagonalizes the
    assembled mass matrix; ``vandermonde`` takes the economy SVD of the
    root-weighted stacked basis values, which stays stable where the mass
    route loses the small singular values.  Set ``min_sv_ratio = 0`` to
    push through nearly singular mass matrices on purpose.
    """
    vm = l_minus @ coeffs.c_minus
    vp = l_plus @ coeffs.c_plus
    ncols = vm.shape[1]
    if vm.shape[0] + vp.shape[0] < ncols:
        raise ValueError(
            f"need at least {ncols} quadrature nodes, have "
            f"{vm.shape[0] + vp.shape[0]}")
    if approach == "mass":
        mass = vm.T @ (w_minus[:, None] * vm) + vp.T @ (w_plus[:, None] * vp)
        basis_v, sv, _ = np.linalg.svd(mass)
        scale = np.sqrt(sv)
    elif approach == "vandermonde":
        stacked = np.vstack((np.sqrt(w_minus)[:, None] * vm,
                             np.sqrt(w_plus)[:, None] * vp))
        _, sv, vh = np.linalg.svd(stacked, full_matrices=False)
        basis_v = vh.T
        scale = sv
    else:
        raise ValueError(f"unknown reconstruction approach {approach!r}")
    if sv[-1] < min_sv_ratio * sv[0]:
        raise RankDeficiencyError(
            f"singular value ratio {sv[-1] / sv[0]:.3e} below "
            f"{min_sv_ratio:.1e} in {approach} reconstruction")
    q = _fix_signs(basis_v) / scale[None, :]
    return BasisCoefficients(coeffs.degree, coeffs.c_minus @ q,
                             coeffs.c_plus @ q)
