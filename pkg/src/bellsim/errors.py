"""Exception types shared across the package."""


class BellsimError(Exception):
    """Base class for package-specific failures."""


class DegenerateCountsError(BellsimError):
    """Raised when a statistic needs detected pairs but every pair was rejected."""


class StarvedSourceError(BellsimError):
    """Raised when the control stage of the active test passes too few pairs."""


class ConvergenceError(BellsimError):
    """Raised when doubling the quadrature resolution still moves a probability."""


class FitFailureError(BellsimError):
    """Raised when a curve fit is requested on a degenerate series."""


class UsageError(BellsimError):
    """Malformed command line or config file input (exit code 2)."""


class RangeError(BellsimError):
    """Well-formed input with an out-of-domain value (exit code 3)."""
