"""Exception hierarchy.

Everything raised on purpose by this package derives from `UPMSPError`,
so callers (the CLI in particular) can separate data problems from bugs.
"""


class UPMSPError(Exception):
    """Base class for all package errors."""


class RepresentationError(UPMSPError, ValueError):
    """A solution or instance violates its structural invariants."""


class MoveError(UPMSPError, ValueError):
    """A move does not fit the solution it is applied to."""


class ParseError(UPMSPError, ValueError):
    """Malformed instance, telemetry or model file.

    Parameters
    ----------
    message : str
        What was expected.
    line : int, optional
        1-based line number of the offending input line.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(UPMSPError, ValueError):
    """Invalid solver or policy configuration."""


class FitError(UPMSPError, ValueError):
    """The regression cannot be fitted (no rows, too few rows)."""


class SingularFitError(FitError):
    """Design matrix is rank deficient after standardization."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(
            "design matrix is rank deficient; offending columns: "
            + ", ".join(self.columns)
        )
