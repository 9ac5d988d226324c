"""Exception types raised by the expsplit package."""


class ExpsplitError(Exception):
    """Base class for all package-specific errors."""


class GridMismatch(ExpsplitError):
    """Operands live on different grids."""


class NonPositiveCoefficient(ExpsplitError):
    """A diffusion coefficient sample is zero or negative."""


class DimensionMismatch(ExpsplitError):
    """Vector length does not match the operator dimension."""


class DimensionCapExceeded(ExpsplitError):
    """Dense eigendecomposition requested above the configured size cap."""


class NoConvergence(ExpsplitError):
    """An iterative solver failed to converge within its iteration budget."""


class InvalidOrder(ExpsplitError):
    """phi-function order outside the supported range {0, 1, 2, 3}."""


class DecompositionMissing(ExpsplitError):
    """Operation requires a cached eigendecomposition that is not present."""


class MissingDerivative(ExpsplitError):
    """A time derivative of the inhomogeneity is required but unavailable."""


class MissingLiftDerivative(ExpsplitError):
    """The boundary lift lacks a required time derivative."""


class ReferenceInconsistent(ExpsplitError):
    """Reference solutions at two refinements disagree by too much."""


class TooFewPoints(ExpsplitError):
    """Not enough usable data points for an order fit."""
