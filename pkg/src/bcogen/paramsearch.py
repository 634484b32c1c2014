"""Grid and random search over full pipeline configurations.

Trials run strictly sequentially: hosted providers are rate-limited and the
embedding cache is shared across trials, so sweeps that vary only k values or
the LLM re-embed nothing.
"""

from __future__ import annotations

import dataclasses
import json
import random as _random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .corpus import ChunkStrategy, RepoFilter
from .errors import EmptyDimension, InvalidParameterSet
from .generation import RunRecord, Violation

DEFAULT_EMBEDDING_MODEL = "text-embedding-3-small"
DEFAULT_LLM_MODEL = "gpt-4o-mini"


@dataclass(frozen=True)
class RepoSpec:
    """Optional supplementary repository to index alongside the paper."""

    locator: str
    branch: str = "main"
    filters: tuple[RepoFilter, ...] = ()

    def to_dict(self) -> dict:
        return {
            "locator": self.locator,
            "branch": self.branch,
            "filters": [
                {"kind": f.kind, "pattern": f.pattern, "mode": f.mode}
                for f in self.filters
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RepoSpec":
        return cls(
            locator=data["locator"],
            branch=data.get("branch", "main"),
            filters=tuple(
                RepoFilter(kind=f["kind"], pattern=f["pattern"], mode=f["mode"])
                for f in data.get("filters", [])
            ),
        )


@dataclass(frozen=True)
class ParameterSet:
    """One full pipeline configuration."""

    loader: str = "pdf"
    chunk_strategy: ChunkStrategy = field(default_factory=ChunkStrategy)
    embedding_model: str = DEFAULT_EMBEDDING_MODEL
    k_first: int = 20
    k_final: int = 5
    llm_model: str = DEFAULT_LLM_MODEL
    repo: RepoSpec | None = None

    def __post_init__(self):
        if self.k_final < 1 or self.k_first < self.k_final:
            raise InvalidParameterSet(
                f"require k_first >= k_final >= 1, got k_first={self.k_first} k_final={self.k_final}"
            )

    def to_dict(self) -> dict:
        return {
            "loader": self.loader,
            "chunk_strategy": self.chunk_strategy.to_dict(),
            "embedding_model": self.embedding_model,
            "k_first": self.k_first,
            "k_final": self.k_final,
            "llm_model": self.llm_model,
            "repo": self.repo.to_dict() if self.repo else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        return cls(
            loader=data.get("loader", "pdf"),
            chunk_strategy=ChunkStrategy.from_dict(data.get("chunk_strategy", {})),
            embedding_model=data.get("embedding_model", DEFAULT_EMBEDDING_MODEL),
            k_first=int(data.get("k_first", 20)),
            k_final=int(data.get("k_final", 5)),
            llm_model=data.get("llm_model", DEFAULT_LLM_MODEL),
            repo=RepoSpec.from_dict(data["repo"]) if data.get("repo") else None,
        )

    def digest(self, length: int = 12) -> str:
        import hashlib

        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:length]


_FIELD_NAMES = {f.name for f in dataclasses.fields(ParameterSet)}


@dataclass
class SearchSpace:
    """Map from ParameterSet field name to its candidate values."""

    dimensions: dict[str, list]

    def validate(self) -> None:
        for name, candidates in self.dimensions.items():
            if name not in _FIELD_NAMES:
                raise ValueError(
                    f"{name!r} is not a ParameterSet field; valid names: {sorted(_FIELD_NAMES)}"
                )
            if not candidates:
                raise EmptyDimension(f"dimension {name!r} has no candidate values")

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SearchSpace":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        dims: dict[str, list] = {}
        for name, candidates in raw.items():
            dims[name] = [_coerce_candidate(name, c) for c in candidates]
        space = cls(dims)
        space.validate()
        return space


def _coerce_candidate(name: str, value: Any) -> Any:
    if name == "chunk_strategy" and isinstance(value, dict):
        return ChunkStrategy.from_dict(value)
    if name == "repo" and isinstance(value, dict):
        return RepoSpec.from_dict(value)
    return value


def grid(space: SearchSpace, base: ParameterSet | None = None) -> list[ParameterSet]:
    """Full Cartesian product, in deterministic lexicographic order of
    dimension names, then candidate order within each dimension."""
    space.validate()
    base = base if base is not None else ParameterSet()
    names = sorted(space.dimensions)
    sets: list[ParameterSet] = []

    def expand(i: int, overrides: dict):
        if i == len(names):
            sets.append(dataclasses.replace(base, **overrides))
            return
        name = names[i]
        for candidate in space.dimensions[name]:
            expand(i + 1, {**overrides, name: candidate})

    expand(0, {})
    return sets


def random_search(
    space: SearchSpace, n: int, seed: int, base: ParameterSet | None = None
) -> list[ParameterSet]:
    """n sets sampled uniformly and independently per dimension from a seeded
    PRNG. The same seed produces the identical list; duplicates are allowed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    space.validate()
    base = base if base is not None else ParameterSet()
    names = sorted(space.dimensions)
    rng = _random.Random(seed)
    sets = []
    for _ in range(n):
        overrides = {name: rng.choice(space.dimensions[name]) for name in names}
        sets.append(dataclasses.replace(base, **overrides))
    return sets


def run_trials(sets: list[ParameterSet], domains: list[str], pipeline) -> list[RunRecord]:
    """Execute trials strictly sequentially in list order, one RunRecord per
    requested domain per trial. A failing trial records its error in the
    returned record and never aborts the sweep."""
    records: list[RunRecord] = []
    for trial_number, params in enumerate(sets, start=1):
        for domain in domains:
            try:
                records.append(pipeline.generate(domain, params))
            except Exception as exc:  # noqa: BLE001 - trial isolation is the contract
                records.append(_failed_record(trial_number, domain, params, exc))
    return records


def _failed_record(trial_number: int, domain: str, params: ParameterSet, exc: Exception) -> RunRecord:
    from datetime import datetime, timezone

    return RunRecord(
        run_id=f"failed-trial-{trial_number}-{domain}",
        domain=domain,
        paper_id="",
        parameter_set=params,
        generated_json=None,
        raw_response="",
        source_nodes=[],
        attempts=0,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        validation=[Violation(path="", message=f"trial failed: {type(exc).__name__}: {exc}")],
    )
