"""Exception types shared across the package."""


class MofsError(Exception):
    """Base class for all package-specific errors."""


class DataFormatError(MofsError):
    """Raised when an input file or table violates the expected layout."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UndefinedMetricError(MofsError):
    """Raised when a metric denominator is zero or counts are inconsistent."""


class ConfigurationError(MofsError):
    """Raised for invalid or incompatible experiment configuration."""
