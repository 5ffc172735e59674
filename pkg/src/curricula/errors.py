"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration/usage problems exit
with 2, numeric/runtime failures with 1.
"""


class CurriculaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CurriculaError):
    """Invalid spec, option, or configuration value."""


class InputError(CurriculaError):
    """Malformed or incompatible runtime input (shapes, labels, id sets)."""


class NumericError(CurriculaError):
    """Non-finite or otherwise unusable numeric state."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss; carries a diagnostic record."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class UndefinedCorrelationError(NumericError):
    """Correlation is undefined (constant input / zero rank variance)."""


class FormatError(CurriculaError):
    """Malformed binary artifact; ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnsupportedVersionError(FormatError):
    """Artifact written by an unknown format version."""


class ParseError(CurriculaError):
    """Malformed text input; ``line`` is the 1-based source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class StratificationError(CurriculaError):
    """A class is too small to stratify."""
