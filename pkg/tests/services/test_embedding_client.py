"""
Unit tests for embedding_client.py

Tests batching, retries and contract checks against an httpx MockTransport.
"""

import json

import httpx
import numpy as np
import pytest

from refertriage.app.core.errors import EmbeddingServiceError
from refertriage.app.services.embedding_client import (
    ENDPOINT_ENV_VAR,
    endpoint_from_env,
    fetch_remote_embeddings,
)

TABLE = {
    "alpha": [1.0, 0.0, 0.5],
    "beta": [0.0, 1.0, -0.5],
    "gamma": [0.25, 0.25, 0.25],
    "delta": [-1.0, 2.0, 3.0],
    "epsilon": [9.0, 8.0, 7.0],
}


def _echo_client(requests: list, fail_first: int = 0, status: int = 503) -> httpx.Client:
    state = {"failures": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        if state["failures"] < fail_first:
            state["failures"] += 1
            return httpx.Response(status)
        texts = json.loads(request.content)["texts"]
        requests.append(texts)
        return httpx.Response(200, json={"vectors": [TABLE[t] for t in texts]})

    return httpx.Client(transport=httpx.MockTransport(handler))


def test_fetch_batches_in_order():
    """Test 5 texts with batch_size 2 make 3 requests and keep order."""
    requests = []
    texts = list(TABLE)

    matrix = fetch_remote_embeddings(
        "http://embed.local/", texts, batch_size=2, client=_echo_client(requests)
    )

    assert requests == [["alpha", "beta"], ["gamma", "delta"], ["epsilon"]]
    np.testing.assert_array_equal(matrix.vectors, np.array([TABLE[t] for t in texts]))
    assert matrix.record_ids == ("0", "1", "2", "3", "4")


def test_fetch_posts_to_embed_path():
    """Test requests go to {endpoint}/embed."""
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(str(request.url))
        return httpx.Response(200, json={"vectors": [[1.0, 2.0]]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    fetch_remote_embeddings("http://embed.local/api", ["x"], client=client, record_ids=["r1"])

    assert seen == ["http://embed.local/api/embed"]


def test_fetch_wrong_vector_count():
    """Test that 4 vectors for 5 texts is a contract error."""

    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"vectors": [[0.0, 1.0]] * 4})

    client = httpx.Client(transport=httpx.MockTransport(handler))

    with pytest.raises(EmbeddingServiceError, match="4 vectors for 5 texts"):
        fetch_remote_embeddings("http://embed.local", list(TABLE), batch_size=5, client=client)


def test_fetch_inconsistent_dimension():
    """Test that batches of different widths are rejected."""

    def handler(request: httpx.Request) -> httpx.Response:
        texts = json.loads(request.content)["texts"]
        width = 2 if texts[0] == "alpha" else 3
        return httpx.Response(200, json={"vectors": [[0.0] * width for _ in texts]})

    client = httpx.Client(transport=httpx.MockTransport(handler))

    with pytest.raises(EmbeddingServiceError, match="inconsistent"):
        fetch_remote_embeddings("http://embed.local", ["alpha", "beta"], batch_size=1, client=client)


@pytest.mark.parametrize("vector", [["a", 1.0], [None, 1.0], [[1.0], 2.0], 3.0])
def test_fetch_rejects_non_numeric_vectors(vector):
    """Test malformed vector entries surface as service errors."""

    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"vectors": [vector]})

    client = httpx.Client(transport=httpx.MockTransport(handler))

    with pytest.raises(EmbeddingServiceError, match="embedding"):
        fetch_remote_embeddings("http://embed.local", ["alpha"], client=client)


def test_fetch_retries_then_succeeds():
    """Test transient 503 responses are retried with backoff."""
    requests, delays = [], []

    matrix = fetch_remote_embeddings(
        "http://embed.local",
        ["alpha"],
        client=_echo_client(requests, fail_first=2),
        sleep=delays.append,
        backoff_seconds=0.5,
    )

    assert delays == [0.5, 1.0]
    np.testing.assert_array_equal(matrix.vectors, [TABLE["alpha"]])


def test_fetch_gives_up_after_retries():
    """Test exhausting retries raises EmbeddingServiceError."""
    delays = []

    with pytest.raises(EmbeddingServiceError, match="after 3 attempt"):
        fetch_remote_embeddings(
            "http://embed.local",
            ["alpha"],
            client=_echo_client([], fail_first=10),
            max_retries=2,
            sleep=delays.append,
        )
    assert len(delays) == 2


def test_fetch_retries_transport_errors():
    """Test connection errors are retried like HTTP failures."""
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        if calls["n"] == 1:
            raise httpx.ConnectError("refused", request=request)
        return httpx.Response(200, json={"vectors": [[1.0]]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    matrix = fetch_remote_embeddings("http://embed.local", ["x"], client=client, sleep=lambda s: None)

    assert calls["n"] == 2
    assert matrix.vectors.tolist() == [[1.0]]


def test_fetch_rejects_bad_batch_size():
    """Test batch_size validation."""
    with pytest.raises(ValueError):
        fetch_remote_embeddings("http://embed.local", ["x"], batch_size=0)


def test_endpoint_from_env(monkeypatch):
    """Test the endpoint is read from REFERTRIAGE_EMBED_ENDPOINT."""
    monkeypatch.setenv(ENDPOINT_ENV_VAR, "http://embed.local")
    assert endpoint_from_env() == "http://embed.local"

    monkeypatch.delenv(ENDPOINT_ENV_VAR)
    with pytest.raises(ValueError, match=ENDPOINT_ENV_VAR):
        endpoint_from_env()
