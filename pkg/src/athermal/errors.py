"""Exception types shared across the package."""


class AthermalError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AthermalError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class DimensionError(AthermalError, ValueError):
    """Array shapes are inconsistent or exceed a configured cap."""


class CertificationError(AthermalError, ArithmeticError):
    """A truncation or tail bound cannot be certified below the tolerance."""


class ConvergenceError(AthermalError, ArithmeticError):
    """An iterative numerical routine did not reach its tolerance."""
