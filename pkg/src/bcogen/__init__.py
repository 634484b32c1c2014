"""bcogen: retrieval-augmented generation of schema-valid BioCompute Object
domains from a paper PDF and optional code repository."""

__version__ = "0.1.0"

from .corpus import Chunk, ChunkStrategy, RepoFilter, SourceDocument, chunk, fetch_repo, load_pdf
from .embedding import Embedder, EmbeddingCache, EmbeddingVector, MockEmbeddingProvider, embed_batch, normalize
from .generation import RunRecord, extract_json, generate_domain, validate_against_schema
from .paramsearch import ParameterSet, RepoSpec, SearchSpace, grid, random_search, run_trials
from .pipeline import Pipeline, ProviderSet, build_providers
from .registry import DOMAIN_NAMES, Registry, build_generation_prompt, load_registry
from .runstore import RunStore, paper_id_for
from .vectorindex import IndexEntry, RetrievalResult, VectorIndex, two_pass_retrieve

__all__ = [
    "Chunk",
    "ChunkStrategy",
    "DOMAIN_NAMES",
    "Embedder",
    "EmbeddingCache",
    "EmbeddingVector",
    "IndexEntry",
    "MockEmbeddingProvider",
    "ParameterSet",
    "Pipeline",
    "ProviderSet",
    "Registry",
    "RepoFilter",
    "RepoSpec",
    "RetrievalResult",
    "RunRecord",
    "RunStore",
    "SearchSpace",
    "SourceDocument",
    "VectorIndex",
    "build_generation_prompt",
    "build_providers",
    "chunk",
    "embed_batch",
    "extract_json",
    "fetch_repo",
    "generate_domain",
    "grid",
    "load_pdf",
    "load_registry",
    "normalize",
    "paper_id_for",
    "random_search",
    "run_trials",
    "two_pass_retrieve",
    "validate_against_schema",
]
