"""Exception hierarchy.

Validation problems (bad orbit data, bad configuration) derive from
:class:`ValidationError`; failures of a numerical guard (contour too close to a
zero, non-integer winding number, Newton failing to converge) derive from
:class:`NumericalGuardError`.  The command line maps the two families to exit
codes 1 and 2.
"""


class ResLabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ResLabError, ValueError):
    pass


class NumericalGuardError(ResLabError, ArithmeticError):
    pass


class NonHyperbolic(ValidationError):
    """An eigenvalue sits on (or numerically at) the unit circle / imaginary axis."""


class NotHyperbolic(NonHyperbolic):
    """A toral matrix has ``|trace| <= 2`` or is not unimodular."""


class HorizonTooShort(ValidationError):
    pass


class MissingPrimitiveData(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class ZeroMapResonance(ValidationError):
    pass


class IncompleteSource(ValidationError):
    pass


class AccuracyDomainExceeded(ValidationError):
    pass


class ConfigError(ValidationError):
    """Malformed or non-conforming configuration document."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergentRegion(NumericalGuardError):
    """Orbit sum terms grow: the evaluation point is below the convergence abscissa."""


class ContourTooClose(NumericalGuardError):
    pass


class NonIntegerResidue(NumericalGuardError):
    pass


class NoConvergence(NumericalGuardError):
    pass


class LocalizationMismatch(NumericalGuardError):
    """Refined multiplicities do not add up to the window's winding number."""
