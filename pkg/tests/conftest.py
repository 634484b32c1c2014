"""Shared fixtures: generated PDF files, a small repository tree, and
scripted offline providers."""

from __future__ import annotations

import io
from pathlib import Path

import pytest
from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas

from bcogen.embedding import EmbeddingProvider, MockEmbeddingProvider
from bcogen.evaluation import JudgeProvider
from bcogen.generation import ChatProvider

# The published example of a generated usability domain; used as the scripted
# model output in generation tests.
USABILITY_EXAMPLE = [
    "This study aimed to explore the accuracy and precision of copy number "
    "estimation for DUF1220 domains within NBPF genes using high-resolution "
    "sequencing data. The methodology involved aligning longer reads with "
    "increased specificity to quantify individual domains and DUF1220 "
    "sequences. The approach was validated through simulations and digital "
    "droplet PCR (ddPCR), and applied to data from the 1000 Genomes Project. "
    "The results demonstrated the ability to accurately estimate "
    "DUF1220-clade specific copies and delineate clades within individual "
    "NBPF genes, providing insights into gene and intragenic domain copy "
    "number variations. This method enhances the capability to analyze the "
    "role of DUF1220 sequences in human variation and disease, and can be "
    "applied to other multi-copy gene families."
]

PAPER_PAGES = [
    [
        "A workflow for measuring sequence copy number from genome data.",
        "Abstract. This study measured copy number for repeated domains",
        "using high resolution read alignment and simulation.",
        "The purpose of the project was accurate per-domain estimates.",
    ],
    [
        "Methods. Reads were simulated from the reference genome,",
        "aligned with a specific aligner at high stringency,",
        "and counted per domain with a coverage script.",
        "Parameters: alignment stringency high, read length 150.",
    ],
    [
        "Results. Estimates matched droplet PCR validation closely.",
        "The pipeline produced per-clade copy number tables as output.",
        "Conclusions. The method generalizes to other repeated gene families.",
    ],
]


def write_pdf(path: Path, pages: list[list[str]]) -> Path:
    """Render one fixture PDF, one drawString per line."""
    c = canvas.Canvas(str(path), pagesize=letter)
    for lines in pages:
        y = 720
        for line in lines:
            c.drawString(72, y, line)
            y -= 20
        c.showPage()
    c.save()
    return path


def write_image_only_pdf(path: Path) -> Path:
    c = canvas.Canvas(str(path), pagesize=letter)
    c.rect(100, 100, 300, 300, fill=1)
    c.showPage()
    c.save()
    return path


@pytest.fixture
def hello_pdf(tmp_path) -> Path:
    return write_pdf(tmp_path / "hello.pdf", [["Hello corpus."]])


@pytest.fixture
def paper_pdf(tmp_path) -> Path:
    return write_pdf(tmp_path / "paper.pdf", PAPER_PAGES)


REPO_FILES = {
    "src/a.py": "def analyze():\n    return 1\n",
    "src/b.rs": "fn main() { println!(\"align\"); }\n",
    "docs/readme.md": "# Fixture workflow\nAlignment pipeline documentation.\n",
}


@pytest.fixture
def fixture_repo(tmp_path) -> Path:
    root = tmp_path / "repo"
    for rel, text in REPO_FILES.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


class ScriptedChatProvider(ChatProvider):
    """Returns canned responses in order and records every call."""

    def __init__(self, responses: list[str], model_id: str = "scripted-chat"):
        self.model_id = model_id
        self.responses = list(responses)
        self.calls: list[tuple[str, str, float]] = []

    def complete(self, system: str, user: str, temperature: float) -> str:
        self.calls.append((system, user, temperature))
        if not self.responses:
            raise AssertionError("scripted chat provider ran out of responses")
        if len(self.responses) == 1:
            return self.responses[0]
        return self.responses.pop(0)


class ScriptedJudge(JudgeProvider):
    """Extraction and classification driven by fixed tables."""

    def __init__(self, units: list[str], verdicts: dict[str, str] | None = None,
                 default_verdict: str = "yes"):
        self.units = list(units)
        self.verdicts = dict(verdicts or {})
        self.default_verdict = default_verdict
        self.classify_calls: list[tuple[str, str, str]] = []

    def extract(self, text: str, kind: str) -> list[str]:
        if not text.strip():
            return []
        return list(self.units)

    def classify(self, item: str, against: str, question: str) -> str:
        self.classify_calls.append((item, against, question))
        return self.verdicts.get(item, self.default_verdict)


class CountingEmbeddingProvider(EmbeddingProvider):
    """Wraps the deterministic mock and counts embed() calls and texts."""

    def __init__(self, model_id: str = "mock-embedding", dimension: int = 16):
        self._inner = MockEmbeddingProvider(model_id=model_id, dimension=dimension)
        self.model_id = model_id
        self.calls = 0
        self.texts_embedded = 0

    def embed(self, texts: list[str]) -> list[list[float]]:
        self.calls += 1
        self.texts_embedded += len(texts)
        return self._inner.embed(texts)
