"""Error types for dataset and weight-file handling."""


class TrainerError(Exception):
    """Base class for all trainer-specific failures."""


class FormatError(TrainerError):
    """A binary stream does not match its declared layout."""


class DataError(TrainerError):
    """Dataset contents violate a precondition (dim mismatch, bad labels)."""


class EngineError(TrainerError):
    """The segmentation engine CLI is missing or returned a failure."""
