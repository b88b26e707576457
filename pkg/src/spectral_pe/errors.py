"""Exception types shared across the package."""


class SpectralPEError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(SpectralPEError):
    """A value passed to a constructor or generator is out of range."""


class GenerationError(SpectralPEError):
    """A random-graph generator cannot produce a valid sample."""


class GraphFormatError(SpectralPEError):
    """An on-disk graph file is malformed."""


class CapacityError(SpectralPEError):
    """The requested problem size exceeds a hard resource cap."""


class ConvergenceError(SpectralPEError):
    """An iterative routine ran out of iterations.

    `residuals` carries the best residual norms achieved, when known.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ConfigurationError(SpectralPEError):
    """Mutually inconsistent options, or an option the code cannot honor."""


class FittingError(SpectralPEError):
    """A least-squares or interpolation problem is rank deficient."""


class KernelError(SpectralPEError):
    """A spectral kernel produced an invalid (negative) weight."""


class ReachabilityError(SpectralPEError):
    """A walk-based estimate was requested between disconnected nodes."""


class TrainingError(SpectralPEError):
    """Training diverged (non-finite loss or gradients)."""
