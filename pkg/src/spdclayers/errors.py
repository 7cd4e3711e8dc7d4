"""Exception types shared across the package."""


class SpdcLayersError(Exception):
    """Base class for all package errors."""


class OutOfRange(SpdcLayersError):
    """Frequency or angle outside a model's declared validity window."""


class InvalidArgument(SpdcLayersError):
    """Structurally invalid input (non-positive length, even layer count, ...)."""


class SingularMatrix(SpdcLayersError):
    """Transfer-matrix chain is numerically degenerate."""


class NotFound(SpdcLayersError):
    """A requested spectral feature does not exist in the analyzed window."""


class PeakNotFound(NotFound):
    """The targeted forbidden band or transmission peak is absent."""


class WindowMiss(SpdcLayersError):
    """An idler window captures a negligible fraction of the correlated weight."""


class ComputationError(SpdcLayersError):
    """Propagated numerical failure in a pipeline step."""


class GridTooCoarseWarning(UserWarning):
    """Grid spacing undersamples the fastest phase oscillation of the kernel."""
