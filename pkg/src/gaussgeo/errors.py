"""Exception types raised by gaussgeo."""


class InvalidInput(ValueError):
    """Input violates a precondition (shape, symmetry, positivity, range)."""


class NumericalFailure(ArithmeticError):
    """A numerical routine did not converge or left its valid domain."""
