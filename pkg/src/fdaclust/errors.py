"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class NumericalFailure(ArithmeticError):
    """A numerical routine (factorization, eigensolver, ...) broke down."""


class DegeneratePair(NumericalFailure):
    """A test statistic is undefined for a (curve, center) pair."""
