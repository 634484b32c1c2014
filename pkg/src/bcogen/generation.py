"""Single-domain generation: retrieve context, call the LLM, extract and
validate JSON, and retry with the violation list fed back on invalid output.

An exhausted retry budget is not an error: the invalid record is returned
with its violations recorded so the evaluation UI can display failures.
"""

from __future__ import annotations

import json
import re
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Mapping, TYPE_CHECKING

import jsonschema

from .corpus import Chunk
from .errors import InvalidSchema, NoJsonFound
from .registry import DomainSpec, Registry, build_generation_prompt
from .vectorindex import Reranker, VectorIndex, two_pass_retrieve

if TYPE_CHECKING:
    from .paramsearch import ParameterSet

SYSTEM_MESSAGE = (
    "You are a documentation assistant that turns scientific papers and code "
    "repositories into structured JSON conforming exactly to a provided schema."
)
DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_RETRIES = 2

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


class ChatProvider(ABC):
    """Chat completion endpoint; returns non-empty generated text or raises."""

    model_id: str

    @abstractmethod
    def complete(self, system: str, user: str, temperature: float) -> str:
        ...


@dataclass(frozen=True)
class Violation:
    """One schema violation: a JSON-pointer path into the value and a message."""

    path: str
    message: str

    def to_dict(self) -> dict:
        return {"path": self.path, "message": self.message}

    @classmethod
    def from_dict(cls, data: dict) -> "Violation":
        return cls(path=data["path"], message=data["message"])


@dataclass(frozen=True)
class SourceNode:
    """A retrieved chunk exactly as it was passed to the LLM."""

    chunk_id: str
    chunk_text: str
    first_pass_score: float
    rerank_score: float | None

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "chunk_text": self.chunk_text,
            "first_pass_score": self.first_pass_score,
            "rerank_score": self.rerank_score,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SourceNode":
        return cls(
            chunk_id=data["chunk_id"],
            chunk_text=data["chunk_text"],
            first_pass_score=data["first_pass_score"],
            rerank_score=data.get("rerank_score"),
        )


@dataclass
class RunRecord:
    """One generated domain with its retrieved context and parameters.

    validation is empty exactly when generated_json conforms to the domain
    schema; otherwise it records the residual violations of the final attempt.
    """

    run_id: str
    domain: str
    paper_id: str
    parameter_set: "ParameterSet"
    generated_json: Any
    raw_response: str
    source_nodes: list[SourceNode]
    attempts: int
    created_at: str
    validation: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.validation


def extract_json(raw: str) -> Any:
    """Pull the first parseable JSON value out of a model response.

    Tries, in order: the whole string, fenced code block contents, and an
    outermost-bracket scan across the text. Raises NoJsonFound otherwise.
    """
    stripped = raw.strip()
    try:
        return json.loads(stripped)
    except ValueError:
        pass
    for fence in _FENCE_RE.finditer(raw):
        try:
            return json.loads(fence.group(1).strip())
        except ValueError:
            continue
    decoder = json.JSONDecoder()
    for i, char in enumerate(raw):
        if char not in "[{":
            continue
        try:
            value, _ = decoder.raw_decode(raw, i)
            return value
        except ValueError:
            continue
    raise NoJsonFound("response contains no parseable JSON value")


def validate_against_schema(value: Any, schema: dict) -> list[Violation]:
    """Validate a JSON value; an empty list means it conforms. Each violation
    carries a JSON-pointer path ("" for the document root)."""
    try:
        jsonschema.Draft7Validator.check_schema(schema)
    except jsonschema.SchemaError as exc:
        raise InvalidSchema(f"schema is not valid draft-07: {exc.message}") from exc
    validator = jsonschema.Draft7Validator(schema)

    violations = []
    for error in sorted(validator.iter_errors(value), key=lambda e: list(e.absolute_path)):
        pointer = "".join(f"/{_escape_pointer(part)}" for part in error.absolute_path)
        violations.append(Violation(path=pointer, message=error.message))
    return violations


def _escape_pointer(part: Any) -> str:
    return str(part).replace("~", "~0").replace("/", "~1")


def generate_domain(
    domain: str,
    index: VectorIndex,
    chunks: Mapping[str, Chunk],
    registry: Registry,
    chat: ChatProvider,
    embedder,
    params: "ParameterSet",
    reranker: Reranker | None = None,
    paper_id: str = "",
    max_retries: int = DEFAULT_MAX_RETRIES,
    temperature: float = DEFAULT_TEMPERATURE,
) -> RunRecord:
    """Generate one BCO domain and return its RunRecord, valid or not.

    Retrieval uses the domain's retrieval prompt; the generation prompt is a
    separate template carrying the schema. On invalid JSON or schema
    violations the LLM is retried up to max_retries times with the violation
    list appended verbatim to the user prompt.
    """
    spec = registry.get(domain)
    results = two_pass_retrieve(
        index,
        spec.retrieval_prompt,
        params.k_first,
        params.k_final,
        embedder,
        reranker=reranker,
        chunk_texts={cid: c.text for cid, c in chunks.items()},
    )
    context_chunks = [chunks[r.chunk_id] for r in results]
    source_nodes = [
        SourceNode(
            chunk_id=r.chunk_id,
            chunk_text=chunks[r.chunk_id].text,
            first_pass_score=r.first_pass_score,
            rerank_score=r.rerank_score,
        )
        for r in results
    ]
    prompt = build_generation_prompt(spec, context_chunks)

    value: Any = None
    raw = ""
    violations: list[Violation] = []
    user = prompt
    attempts = 0
    for attempt in range(1, max_retries + 2):
        attempts = attempt
        raw = chat.complete(SYSTEM_MESSAGE, user, temperature)
        try:
            value = extract_json(raw)
        except NoJsonFound as exc:
            value = None
            violations = [Violation(path="", message=str(exc))]
        else:
            violations = validate_against_schema(value, spec.schema)
        if not violations:
            break
        user = prompt + _retry_suffix(violations)

    return RunRecord(
        run_id=f"unsaved-{uuid.uuid4().hex[:10]}",
        domain=domain,
        paper_id=paper_id,
        parameter_set=params,
        generated_json=value,
        raw_response=raw,
        source_nodes=source_nodes,
        attempts=attempts,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        validation=violations,
    )


def _retry_suffix(violations: list[Violation]) -> str:
    lines = "\n".join(
        f"- at {v.path or '<document root>'}: {v.message}" for v in violations
    )
    return (
        "\n\nYour previous response was rejected because it did not validate "
        "against the schema:\n"
        f"{lines}\n"
        "Return a corrected JSON value that validates against the schema."
    )
