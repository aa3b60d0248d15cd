"""Exception hierarchy shared across the package.

Everything raised on purpose derives from ExploreError so callers (CLI,
HTTP service) can map failures to exit codes / status codes in one place.
"""


class ExploreError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(ExploreError):
    """Ingest or validation failure in the corpus store."""


class NotFoundError(ExploreError):
    """A referenced entity (paper, exploration, node) does not exist."""


class DimensionMismatchError(ExploreError):
    """Vector shapes disagree (query vs index, or among embeddings)."""


class DegenerateVectorError(ExploreError):
    """A zero-norm vector where a direction is required."""


class InvalidIndexError(ExploreError):
    """An index is structurally unusable (e.g. avgdl <= 0)."""


class EmbedderUnavailableError(ExploreError):
    """The external embedding service could not produce a vector."""


class ConsistencyError(ExploreError):
    """Artifacts built from different corpus/index generations were mixed."""


class InvalidRankError(ExploreError):
    """Requested factorization rank is out of range for the matrix."""


class InvalidTopicError(ExploreError):
    """A topic is too small for the requested evaluation."""


class InvalidDimensionError(ExploreError):
    """A projection dimension is out of range for the data."""


class EmptyMatrixError(ExploreError):
    """A term-document matrix ended up with no rows or columns."""


class EmptyRetrievalError(ExploreError):
    """Topic modeling was asked to run over an empty document set."""


class GraphTypeError(ExploreError):
    """A graph operation was applied to a node of the wrong kind."""


class ConfigError(ExploreError):
    """Invalid service configuration."""
