"""Exception hierarchy.

The CLI maps these onto exit codes: input/parse errors -> 1, configuration
errors -> 2, analysis failures -> 3.
"""

from __future__ import annotations


class RobovibError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(RobovibError, ValueError):
    """Input data violates an operation's preconditions."""


class ConfigError(RobovibError, ValueError):
    """A parameter or configuration value is invalid."""


class ParseError(InvalidInputError):
    """A file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TimingError(ParseError):
    """The `t` column of a recording disagrees with its sample rate."""


class AnalysisError(RobovibError):
    """An analysis could not produce a result from valid-looking input."""


class NoPulsesError(AnalysisError):
    """No tachometer pulses were found."""


class InsufficientDataError(AnalysisError):
    """Too little data for the requested estimate."""
