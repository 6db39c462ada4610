"""Exception hierarchy shared by every cflab module."""


class CflabError(Exception):
    """Base class for all errors raised by cflab."""


class DimensionError(CflabError, ValueError):
    """Grids that must agree in shape do not, or a grid is empty."""


class InvalidInputError(CflabError, ValueError):
    """An argument is outside its documented domain."""


class NumericalConsistencyError(CflabError, ArithmeticError):
    """A numerical invariant was violated; usually a caller bug."""


class SingularDenominatorError(NumericalConsistencyError):
    pass


class DataError(CflabError):
    """Input files are missing, unreadable or malformed."""
