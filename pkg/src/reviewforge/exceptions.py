"""Exception hierarchy shared across reviewforge."""

from sklearn.exceptions import NotFittedError  # noqa: F401  (re-exported)


class ReviewForgeError(Exception):
    """Base class for data and model errors (CLI exit code 2)."""


class IngestionError(ReviewForgeError):
    """A raw record is missing a field or violates its invariants."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class VocabularyMismatchError(ReviewForgeError):
    """A persisted model was built against a different vocabulary."""


class FeatureSpaceMismatchError(ReviewForgeError):
    """Features were extracted with a different feature space than the model's."""


class ModelFormatError(ReviewForgeError):
    """A model file has the wrong header or a corrupt payload."""
