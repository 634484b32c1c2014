"""Automated LLM-as-judge metrics and the human evaluation record model.

Both metrics follow the same two-step algorithm: an LLM extracts the
statements (or claims) made in the generated output, then the same LLM
classifies each one against the prompt (relevancy) or the retrieved context
(faithfulness). Zero-denominator metrics report an undefined score rather
than 0 or 1, since either constant would bias sweep comparisons.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .corpus import Chunk
from .errors import EmptyContext, JudgeError, ScoreOutOfRange, UnknownRun
from .generation import ChatProvider, NoJsonFound, extract_json
from .registry import default_registry_dir

ANSWER_RELEVANCY = "answer_relevancy"
FAITHFULNESS = "faithfulness"

KIND_STATEMENTS = "statements"
KIND_CLAIMS = "claims"
QUESTION_RELEVANT = "relevant_to_prompt"
QUESTION_SUPPORTED = "supported_by_context"

_QUESTION_TEXT = {
    QUESTION_RELEVANT: (
        "Is the item below relevant to the reference material, i.e. does it "
        "directly address what the reference prompt asks for?"
    ),
    QUESTION_SUPPORTED: (
        "Is the item below truthful based on the facts presented in the "
        "reference material, without contradicting them?"
    ),
}


class JudgeProvider(ABC):
    """Extracts statements/claims from text and classifies them yes/no."""

    @abstractmethod
    def extract(self, text: str, kind: str) -> list[str]:
        ...

    @abstractmethod
    def classify(self, item: str, against: str, question: str) -> str:
        """Returns "yes" or "no"."""


@dataclass(frozen=True)
class MetricResult:
    """score == numerator/denominator when denominator > 0, else None."""

    metric: str
    score: float | None
    numerator: int
    denominator: int
    items: list[tuple[str, str]]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "score": self.score,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "items": [{"text": t, "verdict": v} for t, v in self.items],
        }


def answer_relevancy(prompt: str, output_text: str, judge: JudgeProvider) -> MetricResult:
    """Fraction of statements extracted from the output that the judge deems
    relevant to the input prompt."""
    statements = judge.extract(output_text, KIND_STATEMENTS)
    items = [(s, judge.classify(s, prompt, QUESTION_RELEVANT)) for s in statements]
    return _ratio_metric(ANSWER_RELEVANCY, items)


def faithfulness(
    output_text: str, retrieved_chunks: Sequence[Chunk], judge: JudgeProvider
) -> MetricResult:
    """Fraction of claims extracted from the output that the judge deems
    supported by the retrieved context."""
    if not retrieved_chunks:
        raise EmptyContext("faithfulness requires at least one retrieved chunk")
    context = "\n\n".join(c.text for c in retrieved_chunks)
    claims = judge.extract(output_text, KIND_CLAIMS)
    items = [(c, judge.classify(c, context, QUESTION_SUPPORTED)) for c in claims]
    return _ratio_metric(FAITHFULNESS, items)


def _ratio_metric(metric: str, items: list[tuple[str, str]]) -> MetricResult:
    denominator = len(items)
    numerator = sum(1 for _, verdict in items if verdict == "yes")
    score = numerator / denominator if denominator > 0 else None
    return MetricResult(
        metric=metric,
        score=score,
        numerator=numerator,
        denominator=denominator,
        items=items,
    )


@dataclass
class HumanEvaluation:
    """One evaluator's judgment of one run, entered through the eval UI."""

    run_id: str
    evaluator: str
    overall_quality: int
    content_accuracy: int
    schema_conformance: bool
    hallucination_flags: list[tuple[str, str]] = field(default_factory=list)
    retrieval_relevance: list[tuple[str, int]] = field(default_factory=list)
    notes: str = ""
    saved_at: str = ""

    def validate(self) -> None:
        if not 0 <= self.overall_quality <= 4:
            raise ScoreOutOfRange(
                f"overall_quality must be 0-4, got {self.overall_quality}"
            )
        if not 0 <= self.content_accuracy <= 4:
            raise ScoreOutOfRange(
                f"content_accuracy must be 0-4, got {self.content_accuracy}"
            )
        for chunk_id, score in self.retrieval_relevance:
            if not 0 <= score <= 2:
                raise ScoreOutOfRange(
                    f"retrieval_relevance for {chunk_id} must be 0-2, got {score}"
                )

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "evaluator": self.evaluator,
            "overall_quality": self.overall_quality,
            "content_accuracy": self.content_accuracy,
            "schema_conformance": self.schema_conformance,
            "hallucination_flags": [
                {"json_pointer": p, "note": n} for p, n in self.hallucination_flags
            ],
            "retrieval_relevance": [
                {"chunk_id": c, "score": s} for c, s in self.retrieval_relevance
            ],
            "notes": self.notes,
            "saved_at": self.saved_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HumanEvaluation":
        return cls(
            run_id=data["run_id"],
            evaluator=data["evaluator"],
            overall_quality=int(data["overall_quality"]),
            content_accuracy=int(data["content_accuracy"]),
            schema_conformance=bool(data["schema_conformance"]),
            hallucination_flags=[
                (f["json_pointer"], f["note"]) for f in data.get("hallucination_flags", [])
            ],
            retrieval_relevance=[
                (r["chunk_id"], int(r["score"])) for r in data.get("retrieval_relevance", [])
            ],
            notes=data.get("notes", ""),
            saved_at=data.get("saved_at", ""),
        )


def record_human_evaluation(evaluation: HumanEvaluation, store) -> None:
    """Validate and persist a human evaluation. Re-saving the same
    (run_id, evaluator) overwrites, last write wins, with saved_at updated."""
    evaluation.validate()
    if not store.has_run(evaluation.run_id):
        raise UnknownRun(f"no persisted run with id {evaluation.run_id!r}")
    evaluation.saved_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    store.save_evaluation(evaluation)


class ChatJudgeProvider(JudgeProvider):
    """Judge backed by the chat provider with two fixed prompt templates
    (extraction, classification) loaded from the registry directory."""

    def __init__(self, chat: ChatProvider, registry_dir: str | Path | None = None):
        self.chat = chat
        base = Path(registry_dir) if registry_dir is not None else default_registry_dir()
        self._extraction = (base / "judge" / "extraction_prompt.txt").read_text(encoding="utf-8")
        self._classification = (base / "judge" / "classification_prompt.txt").read_text(encoding="utf-8")

    def extract(self, text: str, kind: str) -> list[str]:
        if not text.strip():
            return []
        prompt = self._extraction.replace("{KIND}", kind).replace("{TEXT}", text)
        try:
            raw = self.chat.complete(
                "You are a careful evaluator of generated documentation.", prompt, 0.0
            )
        except Exception as exc:
            raise JudgeError(f"judge extraction failed: {exc}") from exc
        try:
            value = extract_json(raw)
        except NoJsonFound:
            return []
        if not isinstance(value, list):
            return []
        return [str(item) for item in value]

    def classify(self, item: str, against: str, question: str) -> str:
        prompt = (
            self._classification
            .replace("{QUESTION}", _QUESTION_TEXT.get(question, question))
            .replace("{ITEM}", item)
            .replace("{AGAINST}", against)
        )
        try:
            raw = self.chat.complete(
                "You are a careful evaluator of generated documentation.", prompt, 0.0
            )
        except Exception as exc:
            raise JudgeError(f"judge classification failed: {exc}") from exc
        return "yes" if raw.strip().lower().startswith("yes") else "no"


class MockJudgeProvider(JudgeProvider):
    """Deterministic offline judge: sentences are the extracted units and an
    item counts as supported/relevant when it shares a content token with the
    reference text. Order-insensitive over the reference material."""

    _SENTENCE_RE = re.compile(r"[^.!?\n]+[.!?]?")
    _TOKEN_RE = re.compile(r"[a-z0-9]{3,}")

    def extract(self, text: str, kind: str) -> list[str]:
        return [s.strip() for s in self._SENTENCE_RE.findall(text) if s.strip()]

    def classify(self, item: str, against: str, question: str) -> str:
        item_tokens = set(self._TOKEN_RE.findall(item.lower()))
        against_tokens = set(self._TOKEN_RE.findall(against.lower()))
        return "yes" if item_tokens & against_tokens else "no"
