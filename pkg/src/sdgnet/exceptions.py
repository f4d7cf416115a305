"""Exception hierarchy.

The CLI maps these onto exit codes: ``ValidationError`` -> 1,
``DataError`` and subclasses -> 2, ``FitError`` and subclasses -> 3.
"""


class SdgnetError(Exception):
    """Base class for all package errors."""


class ValidationError(SdgnetError, ValueError):
    """Invalid configuration or argument ranges."""


class DataError(SdgnetError, ValueError):
    """Input data that cannot be processed."""


class DomainError(DataError):
    """Argument outside the mathematical domain of an operation."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateKeyError(ParseError):
    pass


class CollinearityError(DomainError):
    """A predictor is an exact linear function of the others."""


class FitError(SdgnetError, RuntimeError):
    pass


class DegenerateDataError(FitError):
    """Only one label class present."""


class SeparationError(FitError):
    """Complete/quasi separation or non-convergence; ``beta`` holds the last iterate."""

    def __init__(self, message, beta=None, iterations=None):
        super().__init__(message)
        self.beta = beta
        self.iterations = iterations
