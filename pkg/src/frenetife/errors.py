"""Exception types shared across the library."""


class FrenetIFEError(Exception):
    """Base class for all library-specific errors."""


class DegenerateCurveError(FrenetIFEError):
    """The parametrization is singular (vanishing speed) somewhere."""


class SingularMapError(FrenetIFEError):
    """The tube map is not invertible at the requested point."""


class NewtonConvergenceError(FrenetIFEError):
    """Newton iteration for the tube inverse failed to converge."""

    def __init__(self, message, point=None, iterations=None, residual=None):
        super().__init__(message)
        self.point = point
        self.iterations = iterations
        self.residual = residual


class CutTopologyError(FrenetIFEError):
    """The interface cuts an element in an unsupported pattern."""


class RankDeficiencyError(FrenetIFEError):
    """A factorization met a numerically rank-deficient matrix."""
