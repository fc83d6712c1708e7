"""Exception hierarchy shared by all pslab modules.

Every error that code in this package raises deliberately derives from
PSLabError, so callers can distinguish "the library refused" from genuine
bugs. The CLI maps these onto exit codes (see pslab.cli).
"""


class PSLabError(Exception):
    """Base class for all deliberate pslab errors."""


class PrecisionExhausted(PSLabError):
    """Interval evaluation hit max_bits with an integer still inside.

    Raised instead of silently rounding: the caller's precision policy is
    too small for the requested input and must be widened explicitly.
    """


class PrecisionUnreachable(PSLabError):
    """A certified-error series would need more terms than the cap allows."""


class CapacityExceeded(PSLabError):
    """A table or sum would exceed the configured memory/work budget."""


class DomainError(PSLabError):
    """Argument outside the mathematical domain of the operation."""


class DegenerateExponents(PSLabError):
    """Exponent tuple violates the nondegeneracy condition of a bound."""


class QuadratureNotConverged(PSLabError):
    """Successive quadrature refinements failed to settle within tolerance."""


class TableTooSmall(PSLabError):
    """An ArithTable does not extend far enough for the requested sum."""


class InsufficientPoints(PSLabError):
    """Regression requested with fewer usable points than the minimum."""


class UsageError(PSLabError):
    """Invalid command-line arguments; message names the offending flag."""
