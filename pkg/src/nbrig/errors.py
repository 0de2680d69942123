"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument or parameter outside the domain where a quantity is defined."""


class PrecisionLossError(ArithmeticError):
    """Cancellation destroyed more accuracy than the caller allows."""
