"""Exception types raised across the package."""


class NPSpectraError(Exception):
    """Base class for every error raised by np_spectra."""


class InvalidArgumentError(NPSpectraError, ValueError):
    pass


class UnsupportedOrderError(NPSpectraError, ValueError):
    """A derivative order beyond what the geometry or kernel supplies."""


class SingularPointError(NPSpectraError, ValueError):
    """Kernel evaluated at coincident points."""


class InsufficientDataError(NPSpectraError, ValueError):
    pass


class NumericFailureError(NPSpectraError, RuntimeError):
    """Eigen/singular value solver failure.

    ``metadata`` carries the description of the matrix that failed.
    """

    def __init__(self, message, metadata=None):
        super().__init__(message)
        self.metadata = metadata or {}
