"""Exception and warning types shared across the package.

Every error raised by the public API derives from ResilmonError so callers
can catch one base type.  The CLI maps the subclasses to distinct exit
codes, so keep the taxonomy coarse: where an input came from (formula text,
trace file, evaluation run) matters more than what exactly went wrong.
"""


class ResilmonError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ResilmonError):
    """Formula text could not be parsed.

    Carries the 1-based line and column of the offending token so tools
    can point at the input.
    """

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class TraceError(ResilmonError):
    """A trace file or trace payload is malformed."""


class EvaluationError(ResilmonError):
    """A formula cannot be evaluated on the given signal."""


class ResilmonWarning(UserWarning):
    """Base class for warnings emitted by this package."""


class ExtensionWarning(ResilmonWarning):
    """The signal was virtually extended past its end to cover a formula
    horizon.  Results that depend on the extension may overestimate how
    well the system behaves after the trace stops."""


class StrictComparisonWarning(ResilmonWarning):
    """A strict comparison in a formula was interpreted as its non-strict
    counterpart."""
