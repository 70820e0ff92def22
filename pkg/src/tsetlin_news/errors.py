class DimensionError(ValueError):
    """Clause, model and document disagree on the feature count."""


class CorpusError(ValueError):
    """A corpus file is missing columns, empty, or has a malformed row."""


class ModelFormatError(ValueError):
    """A model file has the wrong magic, version or section layout."""


class ChecksumError(ModelFormatError):
    """A model file failed its integrity check (truncated or corrupted)."""


class VocabularyMismatchError(ValueError):
    """A vocabulary does not match the one a model was trained with."""
