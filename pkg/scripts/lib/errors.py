"""Exception hierarchy shared by the shapeinv modules.

Verification *failures* are never raised: they are verdicts inside reports.
Exceptions are reserved for inputs the engine cannot evaluate at all.
"""


class ShapeInvError(Exception):
    """Base class for every error raised by the library."""


class DomainError(ShapeInvError, ValueError):
    """A point, grid or argument lies outside the admissible domain."""


class ParameterError(ShapeInvError, ValueError):
    """Malformed or invalid family parameters or literals."""


class NodefulDeformation(ParameterError):
    """A deformation function changes sign on the physical domain."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class DegreeCollapse(ShapeInvError):
    """The leading coefficient of a Jacobi polynomial vanishes."""

    def __init__(self, n, a, b):
        super().__init__(
            f"Jacobi P_{n}^({a},{b}) collapses below degree {n}: "
            f"leading coefficient vanishes for a+b+n = {a + b + n}"
        )
        self.n = n
        self.a = a
        self.b = b


class SeriesNonConvergence(ShapeInvError, ArithmeticError):
    """A hypergeometric series did not reach its tail tolerance."""

    def __init__(self, message, tail=None, terms=None):
        super().__init__(message)
        self.tail = tail
        self.terms = terms


class ConfigError(ShapeInvError):
    """A required configuration value is missing."""
