"""Exception types shared across the package.

Plain ``ValueError`` is used for malformed arguments (shape mismatches,
out-of-range scalars).  The classes below mark failures that callers may
want to catch and handle separately from argument bugs.
"""


class PsdSampleError(Exception):
    """Base class for runtime failures raised by this package."""


class EmptyMassError(PsdSampleError):
    """The model integrates to zero over the requested region."""


class UnboundedDomainError(PsdSampleError):
    """An operation that needs a bounded hyper-rectangle received an
    unbounded one.  Use ``find_support`` to obtain a bounded box first."""


class ResourceLimitError(PsdSampleError):
    """A size cap was exceeded (leaf enumeration, quartic pair tensor)."""


class IllConditionedError(PsdSampleError):
    """A linear solve failed to reach the required residual accuracy."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped before meeting its tolerance."""
