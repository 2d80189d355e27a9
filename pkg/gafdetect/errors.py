import warnings
from typing import Optional


class GafDetectError(Exception):
    """Base class for every error raised by gafdetect."""


class InvalidInput(GafDetectError, ValueError):
    """Raised when an argument violates the documented preconditions."""


class ShapeError(InvalidInput):
    """Raised when array shapes or channel counts do not agree."""


class OrderError(InvalidInput):
    """Raised when timestamps are not strictly increasing."""


class FormatError(GafDetectError, ValueError):
    """Raised when a dataset container or checkpoint cannot be decoded."""


class StateError(GafDetectError, RuntimeError):
    """Raised when an operation is called in the wrong lifecycle state."""


class InsufficientData(GafDetectError):
    """
    Raised when a corpus is too small for the requested pipeline stage.

    Attributes:
        pattern_class (Optional[PatternClass]): The class that could not be served, if any.
    """

    def __init__(self, message: str, pattern_class: Optional[object] = None):
        super().__init__(message)
        self.pattern_class = pattern_class


class DatasetQualityWarning(UserWarning):
    pass


warnings.simplefilter("once", DatasetQualityWarning)
