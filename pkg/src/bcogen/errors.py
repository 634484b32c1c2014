"""Exception types raised across the pipeline."""


class BcogenError(Exception):
    """Base class for all pipeline errors."""


# --- corpus ---------------------------------------------------------------

class FileNotReadable(BcogenError):
    """Input file is missing or cannot be read."""


class NotAPdf(BcogenError):
    """File does not carry the PDF magic bytes."""


class EmptyExtraction(BcogenError):
    """PDF yielded zero extractable characters; an empty corpus cannot seed retrieval."""


class RepoUnreachable(BcogenError):
    """Repository locator does not resolve to a fetchable repository."""


class BranchNotFound(BcogenError):
    """Named branch does not exist in the repository."""


class PrivateRepo(BcogenError):
    """Repository requires authentication, which is out of scope."""


class InvalidStrategyParams(BcogenError):
    """Chunking strategy parameters violate window > overlap >= 0."""


# --- embedding ------------------------------------------------------------

class ZeroVector(BcogenError):
    """All-zero vector has no direction and cannot be normalized."""


class ProviderError(BcogenError):
    """Transport-level failure talking to a hosted provider, after retries."""


class DimensionMismatch(BcogenError):
    """Vector dimensions are inconsistent with the model or index."""


# --- vector index ---------------------------------------------------------

class DuplicateId(BcogenError):
    """Chunk id already present in the index."""


class IndexSealed(BcogenError):
    """Operation violates the build-then-seal index lifecycle."""


class EmptyIndex(BcogenError):
    """Query issued against an index with no entries."""


class InvalidK(BcogenError):
    """Retrieval k values violate k_first >= k_final >= 1."""


# --- domain registry ------------------------------------------------------

class MissingDomain(BcogenError):
    """A required domain is absent from the registry."""


class SchemaParseError(BcogenError):
    """Domain schema file is malformed, not draft-07, or fails its checksum pin."""


class PromptMissingPlaceholder(BcogenError):
    """Generation prompt template lacks a required placeholder."""


# --- generation -----------------------------------------------------------

class NoJsonFound(BcogenError):
    """No parseable JSON value could be located in the model response."""


class InvalidSchema(BcogenError):
    """Schema supplied for validation is itself invalid."""


# --- parameter search -----------------------------------------------------

class EmptyDimension(BcogenError):
    """Search space dimension has no candidate values."""


class InvalidParameterSet(BcogenError):
    """Parameter set violates its invariants (e.g. k_first < k_final)."""


# --- evaluation -----------------------------------------------------------

class JudgeError(BcogenError):
    """Transport failure while calling the judge provider."""


class EmptyContext(BcogenError):
    """Faithfulness requires at least one retrieved chunk."""


class UnknownRun(BcogenError):
    """Referenced run id does not exist in the store."""


class ScoreOutOfRange(BcogenError):
    """Human evaluation score outside its declared range."""


# --- run store ------------------------------------------------------------

class IoError(BcogenError):
    """Filesystem failure while persisting or reading runs."""


class CorruptIndex(BcogenError):
    """Output map references runs that are missing on disk."""

    def __init__(self, message: str, dangling: list | None = None):
        super().__init__(message)
        self.dangling = list(dangling or [])
