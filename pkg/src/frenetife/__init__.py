"""Immersed finite element bases on curved interfaces via tube coordinates.

The package builds, on Cartesian elements cut by a smooth curve,
piecewise-polynomial spaces that satisfy interface jump conditions
weakly, orthonormalizes them for conditioning, and projects fields onto
the resulting mesh-wide space.  See :mod:`frenetife.cli` for the
experiment driver.
"""

from ._kernels import BACKEND as kernel_backend
from .assembly import (InterfaceElementBasis, MatchedRadialCosine,
                       ProjectionResult, VandermondeSet, basis_eval,
                       build_element_basis, global_projection_study,
                       load_vector, mass_condition_numbers, mass_matrix,
                       project_element, vandermonde, vandermonde_set)
from .curve import (CurveDescriptor, FrenetApparatus, circle,
                    curvature_derivative, ellipse, frenet_apparatus,
                    sample_curve)
from .cutquad import (CutQuadrature, CutTopology, cut_quadrature,
                      find_edge_intersections)
from .errors import (CutTopologyError, DegenerateCurveError, FrenetIFEError,
                     NewtonConvergenceError, RankDeficiencyError,
                     SingularMapError)
from .frenet import (FrenetPoint, InverseMapReport, forward_map, inverse_map,
                     inverse_map_batch, jacobian_forward, physical_gradient,
                     psi_rho)
from .ifebasis import (BasisCoefficients, JDerivTable, JumpResidual,
                       JumpSystem, extend_basis, initial_basis, j_deriv_table,
                       jump_residual, jump_scaling_diagonal, jump_system,
                       reconstruct, solve_special_coeffs,
                       special_initial_basis)
from .mesh import (LABEL_INTERFACE, LABEL_MINUS, LABEL_PLUS, CartesianMesh,
                   FrenetElementInfo, build_mesh, classify_elements,
                   interface_elem_info, xi_init_guess)
from .polyquad import (QuadratureRule1D, TriangleRule, gauss_legendre,
                       legendre_eval, pipk_values, q_eval, qi_values,
                       stroud_triangle)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
