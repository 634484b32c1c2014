"""Wires the modules into a runnable pipeline: ingest, chunk, embed, index,
generate, persist.

Ingestion and the sealed index are cached per (loader, chunk strategy, repo,
embedding model), so sweep trials that only vary k values or the LLM rebuild
nothing, and the embedding cache is shared across every trial.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .corpus import Chunk, SourceDocument, chunk as chunk_document, fetch_repo, load_pdf
from .embedding import Embedder, EmbeddingCache, MockEmbeddingProvider
from .errors import EmptyIndex
from .evaluation import (
    JudgeProvider,
    MockJudgeProvider,
    answer_relevancy,
    faithfulness,
)
from .generation import ChatProvider, RunRecord, generate_domain
from .paramsearch import ParameterSet
from .providers import (
    ApiConfig,
    HttpChatProvider,
    HttpEmbeddingProvider,
    HttpReranker,
    MockChatProvider,
)
from .registry import Registry, load_registry
from .runstore import RunStore, paper_id_for
from .vectorindex import IndexEntry, Reranker, TokenOverlapReranker, VectorIndex

log = logging.getLogger(__name__)


@dataclass
class ProviderSet:
    embedder: Embedder
    chat: ChatProvider
    reranker: Reranker | None
    judge: JudgeProvider | None


def build_providers(
    params: ParameterSet,
    mock: bool,
    cache: EmbeddingCache | None = None,
    api_config: ApiConfig | None = None,
    registry_dir: Path | None = None,
) -> ProviderSet:
    """Real hosted adapters, or the deterministic offline mocks when
    mock=True (no network, no credentials)."""
    if mock:
        embedding_provider = MockEmbeddingProvider(model_id=params.embedding_model)
        chat: ChatProvider = MockChatProvider(model_id=params.llm_model)
        reranker: Reranker = TokenOverlapReranker()
        judge: JudgeProvider = MockJudgeProvider()
    else:
        config = api_config if api_config is not None else ApiConfig.from_env()
        embedding_provider = HttpEmbeddingProvider(params.embedding_model, config)
        chat = HttpChatProvider(params.llm_model, config)
        reranker = HttpReranker(config=config)
        from .evaluation import ChatJudgeProvider

        judge = ChatJudgeProvider(chat, registry_dir)
    return ProviderSet(
        embedder=Embedder(embedding_provider, cache),
        chat=chat,
        reranker=reranker,
        judge=judge,
    )


class Pipeline:
    """One paper (plus optional repository) turned into a queryable corpus,
    with per-domain generation persisted through the run store."""

    def __init__(
        self,
        pdf_path: str | Path,
        store: RunStore | None = None,
        registry: Registry | None = None,
        cache: EmbeddingCache | None = None,
        mock: bool = False,
        api_config: ApiConfig | None = None,
        compute_metrics: bool = False,
        progress=None,
    ):
        self.pdf_path = Path(pdf_path)
        self.store = store
        self.registry = registry if registry is not None else load_registry()
        self.cache = cache if cache is not None else EmbeddingCache(None)
        self.mock = mock
        self.api_config = api_config
        self.compute_metrics = compute_metrics
        self.progress = progress if progress is not None else (lambda msg: log.info(msg))
        self.paper_id = paper_id_for(self.pdf_path)
        self._documents: dict[tuple, list[SourceDocument]] = {}
        self._indexed: dict[tuple, tuple[VectorIndex, dict[str, Chunk]]] = {}
        self._providers: dict[tuple, ProviderSet] = {}

    # -- assembly ------------------------------------------------------------

    def providers_for(self, params: ParameterSet) -> ProviderSet:
        key = (params.embedding_model, params.llm_model, self.mock)
        if key not in self._providers:
            self._providers[key] = build_providers(
                params, self.mock, self.cache, self.api_config
            )
        return self._providers[key]

    def _ingest(self, params: ParameterSet) -> list[SourceDocument]:
        key = (params.loader, params.repo)
        if key in self._documents:
            return self._documents[key]
        self.progress(f"loading {self.pdf_path.name}")
        docs = [load_pdf(self.pdf_path)]
        self.progress(f"extracted {docs[0].metadata.get('pages', '?')} page(s)")
        if params.repo is not None:
            self.progress(f"fetching repository {params.repo.locator} @ {params.repo.branch}")
            repo_docs = fetch_repo(
                params.repo.locator, params.repo.branch, list(params.repo.filters)
            )
            self.progress(f"admitted {len(repo_docs)} repository file(s)")
            docs.extend(repo_docs)
        self._documents[key] = docs
        return docs

    def prepare(self, params: ParameterSet) -> tuple[VectorIndex, dict[str, Chunk]]:
        """Ingest, chunk, embed, and build the sealed index for a parameter
        set, reusing earlier work when the relevant parameters match. With a
        store attached the index is persisted as a sidecar file per corpus
        and loaded back on later runs instead of re-embedding."""
        key = (params.loader, params.chunk_strategy, params.repo, params.embedding_model)
        if key in self._indexed:
            return self._indexed[key]

        docs = self._ingest(params)
        chunks: dict[str, Chunk] = {}
        for doc in docs:
            for piece in chunk_document(doc, params.chunk_strategy):
                chunks[piece.chunk_id] = piece
        self.progress(f"chunked into {len(chunks)} chunk(s)")
        if not chunks:
            raise EmptyIndex("corpus produced no chunks")

        sidecar = self._sidecar_path(key)
        index = self._load_sidecar(sidecar, chunks)
        if index is None:
            providers = self.providers_for(params)
            ordered = sorted(chunks.values(), key=lambda c: c.chunk_id)
            vectors = providers.embedder.embed_texts([c.text for c in ordered])
            index = VectorIndex()
            for piece, vector in zip(ordered, vectors):
                index.insert(IndexEntry(piece.chunk_id, vector))
            index.seal()
            self.progress(f"indexed {len(index)} embedding(s) (dim {index.dimension})")
            if sidecar is not None:
                sidecar.parent.mkdir(parents=True, exist_ok=True)
                index.save(sidecar)
        else:
            self.progress(f"loaded {len(index)} embedding(s) from {sidecar.name}")

        self._indexed[key] = (index, chunks)
        return index, chunks

    def _sidecar_path(self, key: tuple) -> Path | None:
        if self.store is None:
            return None
        import hashlib

        digest = hashlib.sha256(repr(key).encode("utf-8")).hexdigest()[:12]
        return self.store.paper_dir(self.paper_id) / "indexes" / f"{digest}.index"

    def _load_sidecar(
        self, sidecar: Path | None, chunks: dict[str, Chunk]
    ) -> VectorIndex | None:
        if sidecar is None or not sidecar.exists():
            return None
        try:
            index = VectorIndex.load(sidecar)
        except Exception as exc:  # noqa: BLE001 - a corrupt sidecar only means rebuild
            log.warning("ignoring unreadable index sidecar %s: %s", sidecar, exc)
            return None
        if set(index.chunk_ids()) != set(chunks):
            return None  # corpus changed under the same key; rebuild
        return index

    # -- generation ------------------------------------------------------------

    def generate(self, domain: str, params: ParameterSet) -> RunRecord:
        """Generate one domain under a parameter set; persists the record and
        its judge metrics when a store is attached."""
        index, chunks = self.prepare(params)
        providers = self.providers_for(params)
        record = generate_domain(
            domain,
            index,
            chunks,
            self.registry,
            providers.chat,
            providers.embedder,
            params,
            reranker=providers.reranker,
            paper_id=self.paper_id,
        )
        if self.store is not None:
            path = self.store.persist_run(record)
            self.progress(f"persisted run {record.run_id} at {path}")
            if self.compute_metrics and providers.judge is not None:
                self._persist_metrics(record, chunks, providers.judge)
        return record

    def _persist_metrics(self, record: RunRecord, chunks: dict[str, Chunk], judge) -> None:
        import json as _json

        spec = self.registry.get(record.domain)
        output_text = _json.dumps(record.generated_json)
        retrieved = [chunks[n.chunk_id] for n in record.source_nodes if n.chunk_id in chunks]
        try:
            metrics = [
                answer_relevancy(spec.retrieval_prompt, output_text, judge),
                faithfulness(output_text, retrieved, judge),
            ]
        except Exception as exc:  # noqa: BLE001 - metrics never block a run
            log.warning("metrics computation failed for %s: %s", record.run_id, exc)
            return
        self.store.save_metrics(record.paper_id, record.run_id, metrics)
        self.progress(f"metrics recorded for {record.run_id}")
