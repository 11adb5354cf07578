"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class GpdThreshError(Exception):
    """Base class for all package errors."""


class InputError(GpdThreshError, ValueError):
    """Malformed user input: bad files, bad grid specs, bad parameter values."""


class NumericalError(GpdThreshError, RuntimeError):
    """A numerical procedure failed: no convergent fit, all replicates failed."""


class InfeasibleError(GpdThreshError, RuntimeError):
    """The requested configuration cannot be run on the given data."""
