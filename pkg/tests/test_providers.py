"""Hosted provider adapter tests against a local scripted HTTP server."""

from __future__ import annotations

import http.server
import json
import threading

import pytest

from bcogen.errors import ProviderError
from bcogen.providers import (
    ApiConfig,
    HttpChatProvider,
    HttpEmbeddingProvider,
    HttpReranker,
    MockChatProvider,
)
from bcogen.registry import load_registry


class ScriptedServer:
    """Serves a queue of (status, body) responses per path."""

    def __init__(self):
        self.scripts: dict[str, list[tuple[int, dict]]] = {}
        self.requests: list[tuple[str, dict]] = []
        outer = self

        class Handler(http.server.BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                outer.requests.append((self.path, payload))
                queue = outer.scripts.get(self.path, [])
                status, body = queue.pop(0) if queue else (404, {})
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.end_headers()
                self.wfile.write(json.dumps(body).encode())

            def log_message(self, *args):
                pass

        self.server = http.server.HTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def config(self) -> ApiConfig:
        host, port = self.server.server_address
        return ApiConfig(base_url=f"http://{host}:{port}", api_key="test-key",
                         retries=3, backoff=0.0)

    def close(self):
        self.server.shutdown()


@pytest.fixture
def server():
    s = ScriptedServer()
    yield s
    s.close()


def test_embedding_provider_round_trip(server):
    server.scripts["/embeddings"] = [(200, {"vectors": [[3.0, 4.0], [1.0, 0.0]]})]
    provider = HttpEmbeddingProvider("embed-model", server.config)
    assert provider.embed(["a", "b"]) == [[3.0, 4.0], [1.0, 0.0]]
    path, payload = server.requests[0]
    assert path == "/embeddings"
    assert payload == {"model": "embed-model", "texts": ["a", "b"]}


def test_retries_on_5xx_then_succeeds(server):
    server.scripts["/embeddings"] = [
        (500, {}),
        (503, {}),
        (200, {"vectors": [[1.0]]}),
    ]
    provider = HttpEmbeddingProvider("m", server.config)
    assert provider.embed(["a"]) == [[1.0]]
    assert len(server.requests) == 3


def test_retries_on_429(server):
    server.scripts["/chat"] = [(429, {}), (200, {"text": "ok"})]
    provider = HttpChatProvider("m", server.config)
    assert provider.complete("s", "u", 0.0) == "ok"


def test_gives_up_after_three_attempts(server):
    server.scripts["/chat"] = [(500, {}), (500, {}), (500, {})]
    provider = HttpChatProvider("m", server.config)
    with pytest.raises(ProviderError):
        provider.complete("s", "u", 0.0)
    assert len(server.requests) == 3


def test_client_errors_fail_immediately(server):
    server.scripts["/chat"] = [(400, {"error": "bad request"})]
    provider = HttpChatProvider("m", server.config)
    with pytest.raises(ProviderError):
        provider.complete("s", "u", 0.0)
    assert len(server.requests) == 1


def test_transport_error_raises_provider_error():
    config = ApiConfig(base_url="http://127.0.0.1:1", retries=2, backoff=0.0)
    with pytest.raises(ProviderError):
        HttpEmbeddingProvider("m", config).embed(["a"])


def test_chat_payload_carries_messages_and_temperature(server):
    server.scripts["/chat"] = [(200, {"text": "hi"})]
    HttpChatProvider("chat-model", server.config).complete("sys", "usr", 0.25)
    _, payload = server.requests[0]
    assert payload["model"] == "chat-model"
    assert payload["temperature"] == 0.25
    assert payload["messages"] == [
        {"role": "system", "content": "sys"},
        {"role": "user", "content": "usr"},
    ]


def test_reranker_round_trip_and_length_check(server):
    server.scripts["/rerank"] = [(200, {"scores": [0.9, 0.1]})]
    reranker = HttpReranker(config=server.config)
    assert reranker.score("q", ["d1", "d2"]) == [0.9, 0.1]

    server.scripts["/rerank"] = [(200, {"scores": [0.9]})]
    with pytest.raises(ProviderError):
        reranker.score("q", ["d1", "d2"])


def test_mock_chat_answers_each_domain_with_valid_json():
    import jsonschema

    registry = load_registry()
    mock = MockChatProvider()
    for name in registry.names():
        spec = registry.get(name)
        prompt = spec.generation_prompt_template.replace("{SCHEMA}", spec.schema_text).replace(
            "{CONTEXT}", "excerpt"
        )
        value = json.loads(mock.complete("sys", prompt, 0.0))
        assert jsonschema.Draft7Validator(spec.schema).is_valid(value), name
