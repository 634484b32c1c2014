"""Data-driven registry of the eight BCO domains.

Each domain directory pairs a JSON schema with two prompts: a retrieval
prompt free of any schema text, and a generation prompt template carrying
{SCHEMA} and {CONTEXT} placeholders. Keeping retrieval and generation prompts
separate is what keeps similarity scoring clean while still constraining the
model output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .corpus import Chunk
from .errors import MissingDomain, PromptMissingPlaceholder, SchemaParseError

DOMAIN_NAMES = (
    "provenance",
    "usability",
    "extension",
    "description",
    "execution",
    "parametric",
    "io",
    "error",
)

SCHEMA_FILE = "schema.json"
RETRIEVAL_FILE = "retrieval_prompt.txt"
GENERATION_FILE = "generation_prompt.txt"
CHECKSUMS_FILE = "checksums.json"

_CONTEXT_HEADER = "[source: {doc_id} | chars {start}-{end}]"


@dataclass(frozen=True)
class DomainSpec:
    name: str
    schema: dict
    schema_text: str
    retrieval_prompt: str
    generation_prompt_template: str


class Registry:
    """Immutable after load; safe for concurrent reads."""

    def __init__(self, domains: dict[str, DomainSpec]):
        self._domains = dict(domains)

    def names(self) -> tuple[str, ...]:
        return tuple(self._domains)

    def get(self, name: str) -> DomainSpec:
        try:
            return self._domains[name]
        except KeyError:
            raise MissingDomain(
                f"unknown domain {name!r}; valid domains: {', '.join(DOMAIN_NAMES)}"
            ) from None

    def __contains__(self, name: str) -> bool:
        return name in self._domains

    def __len__(self) -> int:
        return len(self._domains)


def default_registry_dir() -> Path:
    return Path(__file__).parent / "registry_data"


def load_registry(directory: str | Path | None = None) -> Registry:
    """Load and validate all eight domain specs, failing fast on a missing or
    malformed domain. Schema files are pinned by sha256 in checksums.json so
    silent drift of the vendored schemas is caught at startup."""
    directory = Path(directory) if directory is not None else default_registry_dir()
    checksums = _load_checksums(directory)

    domains = {}
    for name in DOMAIN_NAMES:
        domain_dir = directory / name
        if not domain_dir.is_dir():
            raise MissingDomain(f"registry has no directory for domain {name!r}")
        domains[name] = _load_domain(name, domain_dir, checksums)
    return Registry(domains)


def _load_checksums(directory: Path) -> dict[str, str]:
    path = directory / CHECKSUMS_FILE
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaParseError(f"{path} is not valid JSON: {exc}") from exc


def _load_domain(name: str, domain_dir: Path, checksums: dict[str, str]) -> DomainSpec:
    schema_path = domain_dir / SCHEMA_FILE
    retrieval_path = domain_dir / RETRIEVAL_FILE
    generation_path = domain_dir / GENERATION_FILE
    for path in (schema_path, retrieval_path, generation_path):
        if not path.exists():
            raise MissingDomain(f"domain {name!r} is missing {path.name}")

    schema_bytes = schema_path.read_bytes()
    pinned = checksums.get(f"{name}/{SCHEMA_FILE}")
    if pinned is not None:
        actual = hashlib.sha256(schema_bytes).hexdigest()
        if actual != pinned:
            raise SchemaParseError(
                f"{schema_path} failed its checksum pin (expected {pinned[:12]}..., got {actual[:12]}...)"
            )

    schema_text = schema_bytes.decode("utf-8")
    try:
        schema = json.loads(schema_text)
    except ValueError as exc:
        raise SchemaParseError(f"{schema_path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.Draft7Validator.check_schema(schema)
    except jsonschema.SchemaError as exc:
        raise SchemaParseError(f"{schema_path} is not a valid draft-07 schema: {exc.message}") from exc

    retrieval_prompt = retrieval_path.read_text(encoding="utf-8").strip()
    template = generation_path.read_text(encoding="utf-8")
    for placeholder in ("{SCHEMA}", "{CONTEXT}"):
        if placeholder not in template:
            raise PromptMissingPlaceholder(
                f"generation prompt for {name!r} lacks the {placeholder} placeholder"
            )
    return DomainSpec(
        name=name,
        schema=schema,
        schema_text=schema_text,
        retrieval_prompt=retrieval_prompt,
        generation_prompt_template=template,
    )


def get_retrieval_prompt(spec: DomainSpec) -> str:
    return spec.retrieval_prompt


def build_generation_prompt(spec: DomainSpec, context_chunks: list[Chunk]) -> str:
    """Instantiate the domain's template with its schema text and the
    retrieved context, each chunk prefixed by a provenance header naming its
    source document and character span."""
    if not context_chunks:
        raise ValueError("context_chunks must be non-empty")
    blocks = []
    for chunk in context_chunks:
        header = _CONTEXT_HEADER.format(
            doc_id=chunk.doc_id, start=chunk.span[0], end=chunk.span[1]
        )
        blocks.append(f"{header}\n{chunk.text}")
    context = "\n\n".join(blocks)
    # str.replace, not str.format: the schema text itself is full of braces.
    return (
        spec.generation_prompt_template
        .replace("{SCHEMA}", spec.schema_text)
        .replace("{CONTEXT}", context)
    )
