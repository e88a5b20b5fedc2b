"""Exception types raised across the package.

Everything derives from CosminerError so callers (and the CLI) can catch
one base class for expected, diagnosable failures while genuine bugs
still surface as ordinary exceptions.
"""


class CosminerError(Exception):
    """Base class for all expected pipeline errors."""


class EmptyOutcomeError(CosminerError):
    """Outcome text is empty after normalization."""


class SchemaError(CosminerError):
    """Input file is missing a required column or header."""


class TaxonomyError(CosminerError):
    """Taxonomy definition is invalid (duplicates, too few labels, unknown name)."""


class VocabError(CosminerError):
    """Vocabulary file is invalid or lacks a required special piece."""


class EmptyCorpusError(CosminerError):
    """An operation requiring a non-empty corpus received an empty one."""


class StoreFormatError(CosminerError):
    """Embedding store file violates the store format."""


class DimensionError(CosminerError):
    """Vector or matrix dimensions are inconsistent."""


class ZeroVectorError(CosminerError):
    """A zero-norm vector was produced where a direction is required."""


class EmptyPoolError(CosminerError):
    """Pooling was asked to collapse an empty sequence of vectors."""


class MissingEmbeddingError(CosminerError):
    """A store-backed provider has no vector for a required key."""

    def __init__(self, key: str):
        super().__init__(f"no embedding for key {key!r}")
        self.key = key


class AttentionFormatError(CosminerError):
    """Attention tensor violates shape or row-stochasticity requirements."""


class InsufficientDataError(CosminerError):
    """Too few items for the requested projection."""


class EmptySetError(CosminerError):
    """Jaccard similarity is undefined on empty token sets."""
