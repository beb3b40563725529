"""Exception types raised by the agingrate package."""


class HmdParseError(ValueError):
    """Raised when an HMD text file cannot be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class SelectionError(ValueError):
    """Raised when a cohort selection rule retains no cohorts."""


class FitInitializationError(RuntimeError):
    """Raised when no valid starting point could be found for a chain."""


class ConfigError(ValueError):
    """Raised for invalid run configuration; carries the offending field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
