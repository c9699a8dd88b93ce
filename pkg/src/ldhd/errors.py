"""Exception types shared across the package."""


class LdhdError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(LdhdError):
    """Operands are defined on different hypercube dimensions."""


class NotOrthonormalError(LdhdError):
    """Projection columns are not orthonormal within tolerance."""


class NotIndependentError(LdhdError):
    """Proposed basis elements are linearly dependent."""


class NotInSpanError(LdhdError):
    """Function cannot be expressed in the given basis within tolerance."""


class InfeasibleError(LdhdError):
    """No element of the span matches the interpolation targets."""


class RankToleranceError(LdhdError):
    """A rank decision fell inside the ambiguity band around the cutoff."""


class TooLargeError(LdhdError):
    """Requested enumeration exceeds the hard size guard."""


class IllConditionedError(LdhdError):
    """Linear system condition number beyond the allowed bound."""


class DivergedError(LdhdError):
    """Gradient descent loss increased far beyond its running minimum."""


class WindowExceededError(LdhdError):
    """Relative offset outside the declared table window."""


class TaskParseError(LdhdError):
    """Token sequence does not match the task grammar."""


class InvalidScaleError(LdhdError):
    """Scale parameter outside the supported range."""
