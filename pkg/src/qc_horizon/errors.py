"""Exception hierarchy shared across the toolkit."""


class QcHorizonError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(QcHorizonError):
    """A mandatory column is missing or the header row is malformed."""


class RecordValidationError(QcHorizonError):
    """A single row or field failed validation."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientDataError(QcHorizonError):
    """Not enough usable records for the requested analysis."""


class SingularDesignError(QcHorizonError):
    """The design matrix is rank deficient (e.g. all dates identical)."""


class DomainError(QcHorizonError):
    """An input lies outside the valid domain of the overhead formula."""


class DivergenceError(QcHorizonError):
    """The code distance diverges at or above the threshold error rate."""


class InstabilityError(QcHorizonError):
    """Too many degenerate bootstrap resamples to report a result."""


class MissingInputError(QcHorizonError):
    """A figure or report was requested without its prerequisite analysis."""
