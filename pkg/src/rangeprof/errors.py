"""Exception types raised by the design library."""


class RangeProfError(Exception):
    """Base class for all library errors."""


class InvalidArgument(RangeProfError, ValueError):
    pass


class InvalidModel(RangeProfError, ValueError):
    """A covariance or prior does not satisfy its structural requirements."""


class UndefinedInput(RangeProfError, ValueError):
    pass


class NumericalDegeneracy(RangeProfError, ArithmeticError):
    """A matrix that must be positive definite failed to factor."""


class NoSolution(RangeProfError, ArithmeticError):
    pass
