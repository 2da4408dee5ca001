"""Exception hierarchy shared by all modules."""


class CfnlError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CfnlError, ValueError):
    """An argument lies outside the domain of the operation (e.g. k > n)."""


class DimensionError(DomainError):
    pass


class PositivityError(DomainError):
    """The conformal Hessian needs u > 0."""


class SingularityError(DomainError):
    """Evaluation requested at (or too close to) a singular point."""


class ConeViolation(CfnlError, ValueError):
    """An eigenvalue vector fails the Garding cone test.

    ``index`` is the first j with sigma_j <= 0 (1-based), ``point`` an
    optional location where the violation happened.
    """

    def __init__(self, message, index=None, point=None):
        super().__init__(message)
        self.index = index
        self.point = point


class DegenerateClosure(CfnlError, ArithmeticError):
    """The radial closure coefficient C(n-1,k-1) lambda2^(k-1) vanishes."""


class IntegrationError(CfnlError, RuntimeError):
    pass


class EstimationError(CfnlError, ValueError):
    pass


class BoundaryError(CfnlError, IndexError):
    """A stencil neighbour is missing from the grid."""


class HypothesisError(CfnlError, ValueError):
    """A lemma hypothesis fails on the sampled data."""


class InternalConsistencyError(CfnlError, AssertionError):
    """Two independent computation routes disagree."""


class ConfigError(CfnlError, ValueError):
    pass
