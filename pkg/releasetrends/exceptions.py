# -*- coding: utf-8 -*-
from typing import Any, Optional


class ReleaseTrendsError(Exception):
    """
    Base class for exceptions raised by the library.
    """


class ProgrammingError(Exception):
    """
    Raised when programming errors are encountered.
    """


class ValidationError(ReleaseTrendsError, ValueError):
    """
    Raised when a snapshot or other input value is out of its valid range.
    """


class MalformedRecord(ValidationError):
    """
    Raised when a line of a snapshot log cannot be decoded.
    """

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DuplicateDay(ValidationError):
    """
    Raised when an app has more than one snapshot for the same day.
    """


class DomainError(ReleaseTrendsError, ValueError):
    """
    Raised when an argument is outside the domain of an operation.
    """


class SeriesTooShort(DomainError):
    """
    Raised when a series has fewer points than an operation requires.
    """


class UndefinedCorrelation(DomainError):
    """
    Raised when a correlation is requested for a series with zero variance.
    """


class DegenerateDesign(DomainError):
    """
    Raised when a regression design has no spread in its regressor.
    """


class EmptyInput(DomainError):
    """
    Raised when an operation that needs at least one item is given none.
    """


class InfeasiblePerplexity(DomainError):
    """
    Raised when t-SNE is asked for a perplexity the number of points can't support.
    """


class DimensionMismatch(DomainError):
    """
    Raised when a feature vector doesn't match the dimension of a model.
    """


class NonConvergence(ReleaseTrendsError):
    """
    Raised when an iterative solver exhausts its iterations.

    The last iterate is available as the 'last_iterate' attribute.
    """

    def __init__(self, message: str, last_iterate: Any = None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigError(ReleaseTrendsError, ValueError):
    """
    Raised when a generator config or pipeline option is invalid or infeasible.
    """


class RunMismatch(ReleaseTrendsError):
    """
    Raised when analysis outputs and ground truth come from different runs.
    """


class StageDependencyError(ReleaseTrendsError):
    """
    Raised when a pipeline stage can't find an artifact of an earlier stage.
    """

    def __init__(self, path: str, stage: Optional[str] = None):
        message = f"Missing artifact: {path}"
        if stage is not None:
            message += f" (run stage '{stage}' first)"
        super().__init__(message)
        self.path = path


class ModelFormatError(ReleaseTrendsError):
    """
    Raised when a persisted model file can't be decoded.
    """


class ModelVersionMismatch(ModelFormatError):
    """
    Raised when a persisted model file has an unsupported format version.
    """


class FoldExcludedWarning(UserWarning):
    """
    Issued when a cross-validation fold is excluded because its training
    part lacks one of the classes.
    """


class MissingTableWarning(UserWarning):
    """
    Issued when a report table can't be produced because its stage hasn't run.
    """


class DegenerateModelWarning(UserWarning):
    """
    Issued when an effect model is trained on samples of a single class.
    """
