"""In-memory vector index: exhaustive cosine scoring plus cross-encoder
re-ranking.

The index follows a build-then-seal lifecycle: single writer inserts, seal()
freezes it, and a sealed index is immutable and safe for unlimited concurrent
queries. Corpora here are a single paper plus at most one repository, so flat
exact scoring beats any approximate structure.
"""

from __future__ import annotations

import re
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .embedding import EmbeddingVector
from .errors import DimensionMismatch, DuplicateId, EmptyIndex, IndexSealed, InvalidK

INDEX_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: str
    vector: EmbeddingVector


@dataclass(frozen=True)
class RetrievalResult:
    """One retrieved chunk. rerank_score is present iff a re-rank pass ran;
    rank is the 1-based final position."""

    chunk_id: str
    first_pass_score: float
    rerank_score: float | None
    rank: int


class Reranker(ABC):
    """Scores (query, chunk) pairs jointly; higher means more relevant."""

    @abstractmethod
    def score(self, query_text: str, chunk_texts: list[str]) -> list[float]:
        """Return one score per chunk text."""


class TokenOverlapReranker(Reranker):
    """Deterministic offline reranker: the score is the number of distinct
    lowercase tokens shared between query and chunk. Order-insensitive."""

    def score(self, query_text: str, chunk_texts: list[str]) -> list[float]:
        query_tokens = set(_TOKEN_RE.findall(query_text.lower()))
        return [
            float(len(query_tokens & set(_TOKEN_RE.findall(text.lower()))))
            for text in chunk_texts
        ]


class VectorIndex:
    def __init__(self):
        self._ids: list[str] = []
        self._vectors: list[tuple[float, ...]] = []
        self._seen: set[str] = set()
        self._sealed = False
        self._matrix: np.ndarray | None = None
        self.model_id: str | None = None
        self.dimension: int | None = None

    def __len__(self) -> int:
        return len(self._ids)

    def chunk_ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    @property
    def sealed(self) -> bool:
        return self._sealed

    def insert(self, entry: IndexEntry) -> None:
        if self._sealed:
            raise IndexSealed("cannot insert into a sealed index")
        if entry.chunk_id in self._seen:
            raise DuplicateId(f"chunk id already indexed: {entry.chunk_id}")
        if self.dimension is None:
            self.dimension = entry.vector.dimension
            self.model_id = entry.vector.model_id
        elif entry.vector.dimension != self.dimension:
            raise DimensionMismatch(
                f"entry dimension {entry.vector.dimension} != index dimension {self.dimension}"
            )
        self._seen.add(entry.chunk_id)
        self._ids.append(entry.chunk_id)
        self._vectors.append(entry.vector.values)

    def seal(self) -> None:
        if self._sealed:
            return
        self._sealed = True
        if self._vectors:
            self._matrix = np.asarray(self._vectors, dtype=np.float64)

    def query(self, qvec: EmbeddingVector, k: int) -> list[RetrievalResult]:
        """Top-k entries by dot product, descending, ties broken by ascending
        chunk_id. Vectors are pre-normalized so this is cosine similarity."""
        if not self._sealed:
            raise IndexSealed("index must be sealed before querying")
        if not self._ids:
            raise EmptyIndex("query against an empty index")
        if k < 1:
            raise InvalidK(f"k must be >= 1, got {k}")
        if qvec.dimension != self.dimension:
            raise DimensionMismatch(
                f"query dimension {qvec.dimension} != index dimension {self.dimension}"
            )
        scores = self._matrix @ np.asarray(qvec.values, dtype=np.float64)
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        return [
            RetrievalResult(
                chunk_id=self._ids[i],
                first_pass_score=float(scores[i]),
                rerank_score=None,
                rank=rank,
            )
            for rank, i in enumerate(order[:k], start=1)
        ]

    def save(self, path: str | Path) -> None:
        """Persist as a sidecar file: version byte, header (model_id,
        dimension, count), then (chunk_id, float32 vector) records, all
        little-endian."""
        path = Path(path)
        model = (self.model_id or "").encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<B", INDEX_FORMAT_VERSION))
            fh.write(struct.pack("<H", len(model)))
            fh.write(model)
            fh.write(struct.pack("<II", self.dimension or 0, len(self._ids)))
            for chunk_id, values in zip(self._ids, self._vectors):
                cid = chunk_id.encode("utf-8")
                fh.write(struct.pack("<H", len(cid)))
                fh.write(cid)
                fh.write(struct.pack(f"<{len(values)}f", *values))

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Read a sidecar file; the loaded index comes back sealed."""
        path = Path(path)
        index = cls()
        with open(path, "rb") as fh:
            version = struct.unpack("<B", fh.read(1))[0]
            if version != INDEX_FORMAT_VERSION:
                raise ValueError(f"unsupported index format version {version}")
            (model_len,) = struct.unpack("<H", fh.read(2))
            model_id = fh.read(model_len).decode("utf-8")
            dimension, count = struct.unpack("<II", fh.read(8))
            for _ in range(count):
                (cid_len,) = struct.unpack("<H", fh.read(2))
                chunk_id = fh.read(cid_len).decode("utf-8")
                values = struct.unpack(f"<{dimension}f", fh.read(4 * dimension))
                index.insert(
                    IndexEntry(chunk_id, EmbeddingVector(tuple(values), model_id))
                )
        index.seal()
        return index


def two_pass_retrieve(
    index: VectorIndex,
    retrieval_prompt: str,
    k_first: int,
    k_final: int,
    embedder,
    reranker: Reranker | None = None,
    chunk_texts: Mapping[str, str] | None = None,
) -> list[RetrievalResult]:
    """Embed the retrieval prompt, take the top k_first by cosine, then
    re-rank the survivors with the cross-encoder down to k_final.

    Without a reranker the first pass is simply truncated. The re-rank pass
    can permute the candidates but never introduces a chunk the first pass
    did not return.
    """
    if k_final < 1 or k_final > k_first:
        raise InvalidK(f"require k_first >= k_final >= 1, got {k_first}, {k_final}")
    qvec = embedder.embed_text(retrieval_prompt)
    first_pass = index.query(qvec, k_first)
    if reranker is None:
        return first_pass[:k_final]
    if chunk_texts is None:
        raise ValueError("chunk_texts is required when a reranker is supplied")

    texts = [chunk_texts[r.chunk_id] for r in first_pass]
    scores = reranker.score(retrieval_prompt, texts)
    if len(scores) != len(first_pass):
        raise ValueError(
            f"reranker returned {len(scores)} scores for {len(first_pass)} chunks"
        )
    reranked = sorted(
        zip(first_pass, scores), key=lambda pair: (-pair[1], pair[0].chunk_id)
    )
    return [
        RetrievalResult(
            chunk_id=result.chunk_id,
            first_pass_score=result.first_pass_score,
            rerank_score=float(score),
            rank=rank,
        )
        for rank, (result, score) in enumerate(reranked[:k_final], start=1)
    ]
