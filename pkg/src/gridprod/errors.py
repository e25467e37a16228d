"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`PrecisionError` -> 3,
:class:`RefusedError` -> 4; everything else deriving from ``ValueError`` is an
invalid request (exit 2).
"""


class GridprodError(Exception):
    """Base class for library errors."""


class NotSquarefreeError(GridprodError, ValueError):
    """A polynomial shares a factor with its derivative."""


class FieldError(GridprodError, ValueError):
    """A defining polynomial is reducible, not totally real, or unsupported."""


class NotUnimodularError(GridprodError, ValueError):
    """A basis matrix does not have determinant +-1."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class NotRegularError(GridprodError, ValueError):
    """A diagonal element has a vanishing root."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class OpenCellError(GridprodError, ValueError):
    """A matrix has a vanishing principal minor in the requested order."""


class PatternError(GridprodError, ValueError):
    """A matrix does not have the required zero/nonzero pattern."""


class PrecisionError(GridprodError, ArithmeticError):
    """Interval data is too wide to decide a comparison."""


class RefusedError(GridprodError):
    """A computation cannot be certified and was not attempted."""


class TooLargeError(RefusedError):
    """An enumeration box exceeds the configured candidate limit."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
