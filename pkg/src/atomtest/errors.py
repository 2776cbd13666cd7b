"""Exception hierarchy shared by every module.

Input problems derive from ``InputError``; anything that makes a statistic
undefined for otherwise well-formed data derives from ``DegenerateError``.
The CLI maps the two families onto different exit codes.
"""


class AtomTestError(Exception):
    """Base class for all package errors."""


class InputError(AtomTestError, ValueError):
    """Malformed or inconsistent input data."""


class DomainError(AtomTestError, ValueError):
    """Argument outside the mathematical domain of a function."""


class BracketError(AtomTestError, ValueError):
    """The supplied interval does not bracket a root."""


class ConvergenceError(AtomTestError, RuntimeError):
    """Iteration limit reached; ``best`` holds the best iterate so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateError(AtomTestError):
    """A statistic is undefined for the data at hand."""


class SingularDesignError(DegenerateError):
    pass


class DegenerateFitError(DegenerateError):
    pass


class SeparationError(DegenerateError):
    """Logistic MLE diverges; ``column`` names the offending design column.

    ``partial`` may carry whatever was computed before the failure.
    """

    def __init__(self, message, column=None, partial=None):
        super().__init__(message)
        self.column = column
        self.partial = partial


class NestingError(DegenerateError):
    """Reduced model fits better than the full model."""


class ContinuousPartUndefinedError(DegenerateError):
    """Too few observed outcomes in a group for the continuous component."""


class HullError(DegenerateError):
    """Hypothesised mean lies outside the open convex hull of the data."""


class RegionError(DegenerateError):
    """A confidence region cannot be laid out on a finite grid."""


class ConfigError(InputError):
    """Malformed scenario configuration; ``line`` and ``field`` locate it."""

    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.field = field
