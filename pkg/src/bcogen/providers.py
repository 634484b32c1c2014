"""Hosted provider adapters and their deterministic offline counterparts.

All hosted adapters speak plain JSON over HTTP against a configurable base
URL, with the credential and base read from ASSISTANT_API_KEY and
ASSISTANT_API_BASE. Retry policy: 3 attempts with exponential backoff
starting at 1s, retrying only on transport errors, 5xx, and 429.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import requests

from .embedding import EmbeddingProvider
from .errors import ProviderError
from .generation import ChatProvider
from .vectorindex import Reranker

ENV_API_KEY = "ASSISTANT_API_KEY"
ENV_API_BASE = "ASSISTANT_API_BASE"

DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_SECONDS = 1.0
DEFAULT_TIMEOUT_SECONDS = 60.0

_RETRYABLE_STATUS = {429}


@dataclass(frozen=True)
class ApiConfig:
    base_url: str
    api_key: str = ""
    timeout: float = DEFAULT_TIMEOUT_SECONDS
    retries: int = DEFAULT_RETRIES
    backoff: float = DEFAULT_BACKOFF_SECONDS

    @classmethod
    def from_env(cls) -> "ApiConfig":
        base = os.environ.get(ENV_API_BASE, "")
        if not base:
            raise ProviderError(
                f"{ENV_API_BASE} is not set; hosted providers need a base URL "
                f"(or run with --mock-providers)"
            )
        return cls(base_url=base.rstrip("/"), api_key=os.environ.get(ENV_API_KEY, ""))


def _post_json(config: ApiConfig, path: str, payload: dict, session=None) -> dict:
    """POST with bounded retries. Retries transport failures, 5xx, and 429;
    any other non-200 fails immediately."""
    http = session if session is not None else requests
    url = f"{config.base_url}{path}"
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"

    last_error = "no attempts made"
    for attempt in range(config.retries):
        if attempt > 0:
            time.sleep(config.backoff * (2 ** (attempt - 1)))
        try:
            resp = http.post(url, json=payload, headers=headers, timeout=config.timeout)
        except requests.RequestException as exc:
            last_error = f"transport error: {exc}"
            continue
        if resp.status_code == 200:
            try:
                return resp.json()
            except ValueError as exc:
                raise ProviderError(f"{url} returned non-JSON body: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code in _RETRYABLE_STATUS:
            last_error = f"HTTP {resp.status_code}"
            continue
        raise ProviderError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
    raise ProviderError(f"{url} failed after {config.retries} attempts ({last_error})")


class HttpEmbeddingProvider(EmbeddingProvider):
    """POST /embeddings with {"model", "texts"}; expects {"vectors": [[...]]}."""

    def __init__(self, model_id: str, config: ApiConfig | None = None, session=None):
        self.model_id = model_id
        self.config = config if config is not None else ApiConfig.from_env()
        self.session = session

    def embed(self, texts: list[str]) -> list[list[float]]:
        body = _post_json(
            self.config,
            "/embeddings",
            {"model": self.model_id, "texts": texts},
            session=self.session,
        )
        try:
            return [[float(v) for v in vec] for vec in body["vectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed embeddings response: {exc}") from exc


class HttpChatProvider(ChatProvider):
    """POST /chat with {"model", "messages", "temperature"}; expects {"text"}."""

    def __init__(self, model_id: str, config: ApiConfig | None = None, session=None):
        self.model_id = model_id
        self.config = config if config is not None else ApiConfig.from_env()
        self.session = session

    def complete(self, system: str, user: str, temperature: float) -> str:
        body = _post_json(
            self.config,
            "/chat",
            {
                "model": self.model_id,
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                "temperature": temperature,
            },
            session=self.session,
        )
        text = body.get("text")
        if not text or not isinstance(text, str):
            raise ProviderError("chat response carried no text")
        return text


class HttpReranker(Reranker):
    """POST /rerank with {"model", "query", "documents"}; expects {"scores"}."""

    def __init__(
        self,
        model_id: str = "cross-encoder-default",
        config: ApiConfig | None = None,
        session=None,
    ):
        self.model_id = model_id
        self.config = config if config is not None else ApiConfig.from_env()
        self.session = session

    def score(self, query_text: str, chunk_texts: list[str]) -> list[float]:
        body = _post_json(
            self.config,
            "/rerank",
            {"model": self.model_id, "query": query_text, "documents": chunk_texts},
            session=self.session,
        )
        try:
            scores = [float(s) for s in body["scores"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed rerank response: {exc}") from exc
        if len(scores) != len(chunk_texts):
            raise ProviderError(
                f"reranker returned {len(scores)} scores for {len(chunk_texts)} documents"
            )
        return scores


# Minimal valid instances per domain, used by the offline chat mock so the
# whole pipeline runs without network or credentials.
_MOCK_DOMAIN_OUTPUTS: dict[str, object] = {
    "usability": [
        "The workflow documented in the provided excerpts was analyzed and "
        "summarized at a high level, describing its overall purpose and goal."
    ],
    "provenance": {
        "name": "Documented workflow",
        "version": "1.0",
        "license": "https://creativecommons.org/licenses/by/4.0/",
        "created": "2024-01-01T00:00:00Z",
        "modified": "2024-01-01T00:00:00Z",
        "contributors": [{"name": "Workflow Author", "contribution": ["authoredBy"]}],
    },
    "extension": [],
    "description": {
        "keywords": ["workflow", "pipeline"],
        "pipeline_steps": [
            {
                "step_number": 1,
                "name": "primary analysis step",
                "description": "The main computational step described in the excerpts.",
                "input_list": [{"uri": "file://inputs/input.txt"}],
                "output_list": [{"uri": "file://outputs/output.txt"}],
            }
        ],
    },
    "execution": {
        "script": [{"uri": {"uri": "file://scripts/run.sh"}}],
        "script_driver": "shell",
        "software_prerequisites": [
            {
                "name": "interpreter",
                "version": "1.0",
                "uri": {"uri": "https://example.org/interpreter"},
            }
        ],
        "external_data_endpoints": [],
        "environment_variables": {},
    },
    "parametric": [{"param": "threshold", "value": "default", "step": "1"}],
    "io": {
        "input_subdomain": [{"uri": {"uri": "file://inputs/input.txt"}}],
        "output_subdomain": [
            {"mediatype": "text/plain", "uri": {"uri": "file://outputs/output.txt"}}
        ],
    },
    "error": {"empirical_error": {}, "algorithmic_error": {}},
}


class MockChatProvider(ChatProvider):
    """Deterministic offline chat provider: answers every generation prompt
    with a minimal schema-valid instance of the domain the prompt requests."""

    def __init__(self, model_id: str = "mock-chat"):
        self.model_id = model_id
        self.calls = 0

    def complete(self, system: str, user: str, temperature: float) -> str:
        self.calls += 1
        lowered = user.lower()
        best_name = None
        best_pos = len(user) + 1
        for name in _MOCK_DOMAIN_OUTPUTS:
            marker = "input and output domain" if name == "io" else f"{name} domain"
            pos = lowered.find(marker)
            if pos != -1 and pos < best_pos:
                best_pos = pos
                best_name = name
        if best_name is None:
            return json.dumps({"note": "no domain request recognized"})
        return json.dumps(_MOCK_DOMAIN_OUTPUTS[best_name], indent=2)
