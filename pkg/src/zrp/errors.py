"""Exception hierarchy shared by all modules."""


class ZRPError(Exception):
    """Base class for library errors."""


class ValidationError(ZRPError, ValueError):
    """Malformed user input (bad matrix, bad window, wrong sizes)."""


class NotInSobolevSpace(ZRPError):
    pass


class NotInScale(ZRPError):
    pass


class NotInDomain(ZRPError):
    pass


class InvalidIndex(ValidationError):
    pass


class OddIndex(ValidationError):
    pass


class WindowInvalid(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class CayleySingular(ZRPError):
    pass


class DegenerateDenominator(ZRPError):
    pass


class UnsupportedFamily(ValidationError):
    pass


class NumericalFailure(ZRPError):
    """A residual exceeded its tolerance."""
