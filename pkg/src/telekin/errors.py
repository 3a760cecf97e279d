"""Exception types shared across the package.

The CLI maps these onto exit codes: parse/validation/calibration problems are
"bad input" (exit 3), everything else unexpected is "runtime" (exit 4).
"""


class TelekinError(Exception):
    """Base class for all package errors."""


class TraceParseError(TelekinError):
    """A persisted file could not be parsed; message names the offending line."""


class ValidationError(TelekinError):
    """Structurally parsed data violates an invariant."""


class CalibrationError(TelekinError):
    """Baseline measurement is missing or insufficient."""


class UndefinedFError(TelekinError):
    """ANOVA error term is exactly zero, so no F statistic exists."""
