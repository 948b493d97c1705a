"""Exception types shared across the package."""


class InvalidConfigurationError(ValueError):
    """Configuration violates a structural precondition (sizes, bounds)."""


class DegenerateFilterError(ValueError):
    """A transmission profile is unusable (e.g. zero total transmission)."""


class NotRepresentableError(ValueError):
    """A weight vector cannot be collapsed to a fixed-length candidate."""


class ExplorationFailureError(RuntimeError):
    """Distance-scale exploration found no usable distances."""


class SamplingDegeneracyError(RuntimeError):
    """A conditional sampling step has no admissible outcome."""
