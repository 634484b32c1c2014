"""Corpus ingestion: paper PDFs, code repositories, and chunking strategies."""

from __future__ import annotations

import hashlib
import io
import re
import tarfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import requests

from ._pdftext import extract_pages
from .errors import (
    BranchNotFound,
    EmptyExtraction,
    FileNotReadable,
    InvalidStrategyParams,
    NotAPdf,
    PrivateRepo,
    RepoUnreachable,
)

ORIGIN_PAPER = "paper_pdf"
ORIGIN_REPO = "repo_file"

CHUNK_STRATEGIES = ("fixed_window", "paragraph")

_BINARY_SNIFF_BYTES = 8192
_PARAGRAPH_SEP = re.compile(r"\n\s*\n")


@dataclass(frozen=True)
class SourceDocument:
    """One ingested text unit: the paper PDF or a single repository file."""

    doc_id: str
    origin: str
    locator: str
    text: str
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    """A contiguous span of a source document's text.

    Invariant: parent.text[span[0]:span[1]] == text, exactly.
    """

    chunk_id: str
    doc_id: str
    text: str
    span: tuple[int, int]
    ordinal: int


@dataclass(frozen=True)
class RepoFilter:
    """Include/exclude rule over repository-relative paths.

    kind="directory" matches an exact leading path component prefix;
    kind="extension" matches a case-insensitive suffix including the dot.
    """

    kind: str
    pattern: str
    mode: str

    def __post_init__(self):
        if self.kind not in ("directory", "extension"):
            raise ValueError(f"unknown filter kind: {self.kind!r}")
        if self.mode not in ("include", "exclude"):
            raise ValueError(f"unknown filter mode: {self.mode!r}")

    def matches(self, relpath: str) -> bool:
        if self.kind == "extension":
            return relpath.lower().endswith(self.pattern.lower())
        prefix = self.pattern.strip("/")
        return relpath == prefix or relpath.startswith(prefix + "/")


def admits(filters: list[RepoFilter] | tuple[RepoFilter, ...], relpath: str) -> bool:
    """A file is admitted iff it matches at least one include filter (or no
    include filters exist) and matches no exclude filter."""
    includes = [f for f in filters if f.mode == "include"]
    excludes = [f for f in filters if f.mode == "exclude"]
    if includes and not any(f.matches(relpath) for f in includes):
        return False
    return not any(f.matches(relpath) for f in excludes)


@dataclass(frozen=True)
class ChunkStrategy:
    """Chunking configuration. Sizes are in characters, not tokens, so the
    same inputs chunk identically regardless of any model's tokenizer."""

    name: str = "fixed_window"
    window: int = 1000
    overlap: int = 100

    def validate(self) -> None:
        if self.name not in CHUNK_STRATEGIES:
            raise InvalidStrategyParams(f"unknown chunk strategy: {self.name!r}")
        if self.window <= 0:
            raise InvalidStrategyParams(f"window must be positive, got {self.window}")
        if self.overlap < 0 or self.window <= self.overlap:
            raise InvalidStrategyParams(
                f"require window > overlap >= 0, got window={self.window} overlap={self.overlap}"
            )

    def to_dict(self) -> dict:
        return {"name": self.name, "window": self.window, "overlap": self.overlap}

    @classmethod
    def from_dict(cls, data: dict) -> "ChunkStrategy":
        return cls(
            name=data.get("name", "fixed_window"),
            window=int(data.get("window", 1000)),
            overlap=int(data.get("overlap", 100)),
        )


def slug_for(path: Path) -> str:
    stem = re.sub(r"[^a-z0-9]+", "-", path.stem.lower()).strip("-")
    return stem or "document"


def content_digest(data: bytes, length: int = 8) -> str:
    return hashlib.sha256(data).hexdigest()[:length]


def load_pdf(path: str | Path) -> SourceDocument:
    """Extract a paper PDF into a SourceDocument.

    Page texts are concatenated in page order, separated by a single newline.
    Raises FileNotReadable, NotAPdf, or EmptyExtraction.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise FileNotReadable(f"cannot read {path}: {exc}") from exc
    if not data.startswith(b"%PDF-"):
        raise NotAPdf(f"{path} does not start with PDF magic bytes")
    try:
        pages = extract_pages(data)
    except ValueError as exc:
        raise FileNotReadable(f"cannot extract {path}: {exc}") from exc
    text = "\n".join(pages)
    if not text.strip():
        raise EmptyExtraction(f"{path} contains no extractable text")
    doc_id = f"{slug_for(path)}-{content_digest(data)}"
    return SourceDocument(
        doc_id=doc_id,
        origin=ORIGIN_PAPER,
        locator=str(path),
        text=text,
        metadata={
            "pages": str(len(pages)),
            "fetched_at": _utcnow(),
        },
    )


def fetch_repo(
    url_or_path: str,
    branch: str = "main",
    filters: list[RepoFilter] | tuple[RepoFilter, ...] = (),
) -> list[SourceDocument]:
    """Fetch one SourceDocument per admitted text file of a repository.

    Accepts a local directory path (used heavily in tests) or an https URL.
    Remote repositories are fetched as a shallow archive of the named branch;
    only file contents are indexed, never history. Binary files (NUL byte in
    the first 8 KiB) are skipped.
    """
    local = Path(url_or_path)
    if local.is_dir():
        files = _walk_local(local)
    elif str(url_or_path).startswith(("http://", "https://")):
        files = _fetch_archive(str(url_or_path), branch)
    else:
        raise RepoUnreachable(f"not a directory or URL: {url_or_path}")

    docs = []
    for relpath, data in files:
        if not admits(filters, relpath):
            continue
        if b"\x00" in data[:_BINARY_SNIFF_BYTES]:
            continue
        text = data.decode("utf-8", errors="replace")
        docs.append(
            SourceDocument(
                doc_id=f"repo:{relpath}",
                origin=ORIGIN_REPO,
                locator=f"{relpath}@{branch}",
                text=text,
                metadata={
                    "extension": Path(relpath).suffix.lower(),
                    "branch": branch,
                    "fetched_at": _utcnow(),
                },
            )
        )
    return docs


def _walk_local(root: Path) -> list[tuple[str, bytes]]:
    out = []
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if any(part.startswith(".") for part in rel.split("/")):
            continue
        try:
            out.append((rel, path.read_bytes()))
        except OSError:
            continue
    return out


def _fetch_archive(url: str, branch: str) -> list[tuple[str, bytes]]:
    archive_url = url if url.endswith(".tar.gz") else f"{url.rstrip('/')}/archive/refs/heads/{branch}.tar.gz"
    try:
        resp = requests.get(archive_url, timeout=60)
    except requests.RequestException as exc:
        raise RepoUnreachable(f"cannot fetch {archive_url}: {exc}") from exc
    if resp.status_code in (401, 403):
        raise PrivateRepo(f"{url} requires authentication")
    if resp.status_code == 404:
        raise BranchNotFound(f"branch {branch!r} not found at {url}")
    if resp.status_code != 200:
        raise RepoUnreachable(f"{archive_url} returned HTTP {resp.status_code}")

    out = []
    try:
        with tarfile.open(fileobj=io.BytesIO(resp.content), mode="r:gz") as tar:
            for member in tar.getmembers():
                if not member.isfile():
                    continue
                rel = member.name.split("/", 1)[1] if "/" in member.name else member.name
                if not rel or any(part.startswith(".") for part in rel.split("/")):
                    continue
                fobj = tar.extractfile(member)
                if fobj is None:
                    continue
                out.append((rel, fobj.read()))
    except tarfile.TarError as exc:
        raise RepoUnreachable(f"{archive_url} is not a valid archive: {exc}") from exc
    return sorted(out)


def chunk(doc: SourceDocument, strategy: ChunkStrategy) -> list[Chunk]:
    """Split a document into chunks whose spans exactly tile the text.

    Deterministic: identical inputs produce identical chunk lists, with ids
    assigned from (doc_id, ordinal).
    """
    strategy.validate()
    text = doc.text
    if not text:
        return []
    if strategy.name == "fixed_window":
        spans = _fixed_window_spans(text, strategy.window, strategy.overlap)
    else:
        spans = _paragraph_spans(text, strategy.window)
    return [
        Chunk(
            chunk_id=f"{doc.doc_id}:{ordinal:04d}",
            doc_id=doc.doc_id,
            text=text[start:end],
            span=(start, end),
            ordinal=ordinal,
        )
        for ordinal, (start, end) in enumerate(spans)
    ]


def _fixed_window_spans(text: str, window: int, overlap: int) -> list[tuple[int, int]]:
    """Stride-arithmetic spans with end boundaries snapped backward to
    whitespace. Starts stay at i*(window-overlap); a snap never moves an end
    by more than `overlap` so coverage of every character is preserved."""
    n = len(text)
    stride = window - overlap
    spans = []
    start = 0
    while start < n:
        raw_end = start + window
        if raw_end >= n:
            spans.append((start, n))
            break
        end = raw_end
        if not text[raw_end].isspace() and not text[raw_end - 1].isspace():
            snapped = _last_whitespace(text, raw_end - overlap, raw_end)
            if snapped is not None:
                end = snapped + 1
        spans.append((start, end))
        start += stride
    return spans


def _paragraph_spans(text: str, window: int) -> list[tuple[int, int]]:
    """Contiguous spans at paragraph boundaries, merged greedily up to
    `window` characters. Blank-line separators stay attached to the preceding
    paragraph so the spans still cover every character. A single paragraph
    longer than the window is split at whitespace."""
    n = len(text)
    starts = [0] + [m.end() for m in _PARAGRAPH_SEP.finditer(text) if m.end() < n]
    boundaries = starts + [n]

    spans = _merge_paragraphs(boundaries, window)
    out = []
    for begin, end in spans:
        if end - begin > window:
            out.extend(_split_contiguous(text, begin, end, window))
        else:
            out.append((begin, end))
    return out


def _merge_paragraphs(boundaries: list[int], window: int) -> list[tuple[int, int]]:
    spans = []
    count = len(boundaries) - 1
    i = 0
    while i < count:
        begin = boundaries[i]
        j = i + 1
        while j < count and boundaries[j + 1] - begin <= window:
            j += 1
        spans.append((begin, boundaries[j]))
        i = j
    return spans


def _split_contiguous(text: str, begin: int, end: int, window: int) -> list[tuple[int, int]]:
    """Split [begin, end) into adjacent spans of at most `window` chars,
    cutting at whitespace when one exists in range."""
    out = []
    start = begin
    while start < end:
        raw_end = min(start + window, end)
        cut = raw_end
        if raw_end < end and not text[raw_end].isspace() and not text[raw_end - 1].isspace():
            snapped = _last_whitespace(text, start + 1, raw_end)
            if snapped is not None:
                cut = snapped + 1
        out.append((start, cut))
        start = cut
    return out


def _last_whitespace(text: str, lo: int, hi: int) -> int | None:
    """Index of the last whitespace char in text[lo:hi), or None."""
    for i in range(hi - 1, max(lo, 0) - 1, -1):
        if text[i].isspace():
            return i
    return None


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
