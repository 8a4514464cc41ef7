"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every error raised on purpose by the
toolkit derives from :class:`NeckbraceError`.
"""


class NeckbraceError(Exception):
    """Base class for toolkit errors."""


class ConfigurationError(NeckbraceError, ValueError):
    """Invalid parameter set or configuration file (usage-level problem)."""


class ParseError(NeckbraceError, ValueError):
    """Malformed input data file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class NumericError(NeckbraceError, ArithmeticError):
    """A computation could not produce a meaningful result."""


class DomainError(NumericError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedConfigurationError(NumericError, ValueError):
    """Geometry the model has no formula for (e.g. a non-triad coupling)."""


class FitError(NumericError):
    """Degenerate or singular least-squares problem."""


class SegmentationError(NumericError):
    """Too many protocol postures could not be located in the kinematics."""


class NormalizationError(NumericError):
    """Normalization reference missing or zero."""


class UndefinedTestError(NumericError):
    """Statistical test has no information (e.g. all paired differences zero)."""
