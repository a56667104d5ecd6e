"""Exception types raised across the package."""


class PolscatError(Exception):
    """Base class for all package errors."""


class InvalidLabelError(PolscatError, ValueError):
    pass


class ShapeError(PolscatError, ValueError):
    pass


class NotAContractionError(PolscatError, ValueError):
    pass


class NonUnitaryError(PolscatError, ValueError):
    pass


class ResourceCapError(PolscatError, RuntimeError):
    """An exponential-cost computation would exceed a configured cap."""


class UnsupportedInputError(PolscatError, ValueError):
    pass


class IntegrityError(PolscatError, ValueError):
    """A computed object violates an invariant it must satisfy (e.g. hermiticity)."""


class SingularTransmissionError(PolscatError, ValueError):
    pass


class ConfigError(PolscatError, ValueError):
    """Scenario configuration could not be parsed; ``location`` names the field."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
