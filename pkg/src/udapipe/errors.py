"""Exception hierarchy.

Validation problems derive from ``ValueError`` and numerical breakdowns from
``ArithmeticError`` so the CLI can map them onto distinct exit codes.
"""


class UdaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(UdaError, ValueError):
    pass


class NumericalError(UdaError, ArithmeticError):
    pass


class InsufficientSamplesError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class MissingClassError(ValidationError):
    pass


class NotPositiveDefiniteError(NumericalError):
    """Cholesky hit a pivot at or below tolerance."""


class SingularMatrixError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SchemaError(ValidationError):
    pass


class EmptyDatasetError(ValidationError):
    pass


class StratificationError(ValidationError):
    pass


class DegenerateVarianceError(ValidationError):
    pass


class DuplicateSeedError(ValidationError):
    pass


class StageError(UdaError):
    """Wraps an error raised inside a pipeline stage, tagged with the stage name.

    The original exception is kept as ``__cause__`` and its category is
    exposed through :attr:`numerical` so callers need not unwrap it.
    """

    def __init__(self, stage, error):
        self.stage = stage
        self.error = error
        super().__init__(f"[{stage}] {error}")

    @property
    def numerical(self):
        return isinstance(self.error, NumericalError)
