"""Exception hierarchy shared by the library and the command line.

Each family maps to one CLI exit code (see :data:`EXIT_CODES`).
"""


class NVBathError(Exception):
    """Base class for all errors raised by nvbath."""


class ConfigError(NVBathError, ValueError):
    """Invalid configuration, unit token or schema violation."""

    def __init__(self, message, pointer=None):
        self.pointer = pointer
        if pointer is not None:
            message = f"{pointer}: {message}"
        super().__init__(message)


class DomainError(NVBathError, ValueError):
    """Argument outside the physical domain of an operation."""


class DataError(NVBathError, ValueError):
    """Measured or simulated data unsuitable for the requested analysis."""


class StatisticsError(DataError):
    """Too few samples for a statistical estimate."""


class NumericalError(NVBathError, ArithmeticError):
    """Quadrature, root finding or overflow failure."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class FitError(NumericalError):
    """A least-squares fit did not converge from any start."""


class IdentifiabilityError(FitError):
    """The free parameters are not determined by the data."""

    def __init__(self, message, deficient=None, diagnostics=None):
        self.deficient = list(deficient or [])
        super().__init__(message, diagnostics)


class NoSolutionError(NumericalError):
    """The inverse problem has no root inside the admissible bracket."""


EXIT_CODES = (
    (ConfigError, 2),
    (DomainError, 2),
    (DataError, 3),
    (NumericalError, 4),
)


def exit_code_for(exc):
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1
