"""Exception roots shared by every service.

Services subclass these next to the code that raises them; the CLI maps
``InputError`` to exit code 2 and ``NumericFailure`` to exit code 3.
"""


class HQMMError(Exception):
    """Base class for errors raised on purpose by this package."""

    pass


class InputError(HQMMError, ValueError):
    """Raised when an input violates a documented precondition or invariant."""

    pass


class NumericFailure(HQMMError, ArithmeticError):
    """Raised when a numeric routine fails on valid input."""

    pass
