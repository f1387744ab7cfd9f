"""Exception and warning types shared across the package."""


class StableRoughError(Exception):
    """Base class for all errors raised by this package."""


class ConvergenceError(StableRoughError):
    """A quadrature or refinement sequence failed to reach its tolerance."""


class YoungConditionError(StableRoughError, ValueError):
    """Raised when 1/p + 1/q <= 1, or the regime does not admit a Young integral."""


class RegimeError(StableRoughError, ValueError):
    """The requested (alpha, q) pair lies outside the regime of the pipeline."""


class MarginError(StableRoughError, ValueError):
    """The sampling grid is too short for the requested operator."""


class NonCauchyWarning(UserWarning):
    """Refinement gaps stopped decreasing."""
