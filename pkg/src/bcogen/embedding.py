"""Embedding vectors, the pluggable provider interface, and a disk cache.

All vectors are normalized once at insert time so retrieval later reduces to
a plain dot product.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import tempfile
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, ZeroVector

NORM_TOLERANCE = 1e-6
DEFAULT_BATCH_SIZE = 64
DEFAULT_MAX_PARALLEL = 4


@dataclass(frozen=True)
class EmbeddingVector:
    """Unit-normalized float vector tagged with the model that produced it."""

    values: tuple[float, ...]
    model_id: str

    @property
    def dimension(self) -> int:
        return len(self.values)


class EmbeddingProvider(ABC):
    """Turns a batch of texts into raw (unnormalized) float vectors."""

    model_id: str

    @abstractmethod
    def embed(self, texts: list[str]) -> list[list[float]]:
        """Return exactly one vector per input text, all of equal dimension."""


def normalize(values: Sequence[float], model_id: str = "") -> EmbeddingVector:
    """Scale a raw vector to unit L2 norm. Raises ZeroVector on all-zero input."""
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        raise ZeroVector("cannot normalize an all-zero vector")
    return EmbeddingVector(tuple(v / norm for v in values), model_id)


def _text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _model_slug(model_id: str) -> str:
    return re.sub(r"[^a-zA-Z0-9._-]+", "_", model_id) or "model"


class EmbeddingCache:
    """Content-addressed store of normalized vectors, keyed by
    (model_id, sha256 of the UTF-8 text).

    With root=None the cache is memory-only. On disk, each record is one JSON
    file written atomically (temp + rename) so concurrent readers never see a
    partial write.
    """

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._memory: dict[tuple[str, str], EmbeddingVector] = {}

    def get(self, model_id: str, text: str) -> EmbeddingVector | None:
        key = (model_id, _text_key(text))
        hit = self._memory.get(key)
        if hit is not None:
            return hit
        if self.root is None:
            return None
        path = self._path(*key)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            vec = EmbeddingVector(tuple(data["values"]), data["model_id"])
        except (OSError, ValueError, KeyError):
            return None
        self._memory[key] = vec
        return vec

    def put(self, model_id: str, text: str, vector: EmbeddingVector) -> None:
        key = (model_id, _text_key(text))
        self._memory[key] = vector
        if self.root is None:
            return
        path = self._path(*key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(
            {"model_id": vector.model_id, "values": list(vector.values)}
        )
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except OSError:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _path(self, model_id: str, text_hash: str) -> Path:
        assert self.root is not None
        return self.root / _model_slug(model_id) / text_hash[:2] / f"{text_hash}.json"


def embed_batch(
    texts: list[str],
    provider: EmbeddingProvider,
    cache: EmbeddingCache | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_parallel: int = DEFAULT_MAX_PARALLEL,
) -> list[EmbeddingVector]:
    """Embed texts, serving repeats and cached entries without provider calls.

    Output order matches input order and every vector is normalized. Uncached
    texts go to the provider in batches with bounded parallelism.
    """
    if not texts:
        raise ValueError("texts must be non-empty")
    cache = cache if cache is not None else EmbeddingCache(None)
    model_id = provider.model_id

    results: dict[str, EmbeddingVector] = {}
    missing: list[str] = []
    for text in texts:
        if text in results:
            continue
        hit = cache.get(model_id, text)
        if hit is not None:
            results[text] = hit
        elif text not in missing:
            missing.append(text)

    if missing:
        batches = [missing[i:i + batch_size] for i in range(0, len(missing), batch_size)]
        if len(batches) == 1 or max_parallel <= 1:
            raw_batches = [provider.embed(batch) for batch in batches]
        else:
            with ThreadPoolExecutor(max_workers=max_parallel) as pool:
                raw_batches = list(pool.map(provider.embed, batches))
        dimension: int | None = None
        for batch, raw in zip(batches, raw_batches):
            if len(raw) != len(batch):
                raise DimensionMismatch(
                    f"provider returned {len(raw)} vectors for {len(batch)} texts"
                )
            for text, values in zip(batch, raw):
                if dimension is None:
                    dimension = len(values)
                elif len(values) != dimension:
                    raise DimensionMismatch(
                        f"provider returned dimensions {dimension} and {len(values)}"
                    )
                vec = normalize(values, model_id)
                cache.put(model_id, text, vec)
                results[text] = vec

    first_dim = next(iter(results.values())).dimension
    for vec in results.values():
        if vec.dimension != first_dim:
            raise DimensionMismatch(
                f"inconsistent dimensions {first_dim} and {vec.dimension} for model {model_id}"
            )
    return [results[text] for text in texts]


class Embedder:
    """Provider + cache bound together; what retrieval and generation use."""

    def __init__(
        self,
        provider: EmbeddingProvider,
        cache: EmbeddingCache | None = None,
        batch_size: int = DEFAULT_BATCH_SIZE,
        max_parallel: int = DEFAULT_MAX_PARALLEL,
    ):
        self.provider = provider
        self.cache = cache if cache is not None else EmbeddingCache(None)
        self.batch_size = batch_size
        self.max_parallel = max_parallel

    @property
    def model_id(self) -> str:
        return self.provider.model_id

    def embed_texts(self, texts: list[str]) -> list[EmbeddingVector]:
        return embed_batch(
            texts,
            self.provider,
            self.cache,
            batch_size=self.batch_size,
            max_parallel=self.max_parallel,
        )

    def embed_text(self, text: str) -> EmbeddingVector:
        return self.embed_texts([text])[0]


class MockEmbeddingProvider(EmbeddingProvider):
    """Deterministic offline provider: vectors are seeded from a hash of
    (model_id, text), so equal inputs embed identically on any machine."""

    def __init__(self, model_id: str = "mock-embedding", dimension: int = 64):
        self.model_id = model_id
        self.dimension = dimension

    def embed(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            digest = hashlib.sha256(f"{self.model_id}\x00{text}".encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            rng = np.random.default_rng(seed)
            out.append(rng.standard_normal(self.dimension).tolist())
        return out
