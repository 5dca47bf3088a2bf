"""Exception hierarchy shared across the package."""


class SearchError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(SearchError, ValueError):
    """A configuration value lies outside its domain."""


class InvalidInputError(SearchError, ValueError):
    pass


class InvalidDataError(SearchError, ValueError):
    pass


class EmptyInputError(SearchError, ValueError):
    pass


class NoDataError(SearchError, LookupError):
    pass


class InsufficientPopulationError(SearchError, ValueError):
    pass


class NotFittedError(SearchError, RuntimeError):
    pass


class ShapeError(SearchError, ValueError):
    pass


class RejectedSubmissionError(SearchError, RuntimeError):
    """Raised when a job is submitted to a pool that has been shut down."""


class IngestionError(SearchError, ValueError):
    """Raised when a CSV file cannot be turned into a dataset."""


class DivergedError(SearchError, ArithmeticError):
    """Training produced a non-finite loss; the evaluation counts as failed."""
