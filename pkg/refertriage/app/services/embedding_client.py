"""
Remote sentence-embedding service client.

Protocol: HTTP POST `{endpoint}/embed` with body `{"texts": [...]}`,
response `{"vectors": [[...], ...]}`. Non-200 responses and transport
failures are retried with exponential backoff; contract violations
(wrong vector count, inconsistent dimension) are not.
"""

import logging
import os
import time
from typing import Callable

import httpx
import numpy as np

from refertriage.app.core.embedding_matrix import EmbeddingMatrix
from refertriage.app.core.errors import EmbeddingServiceError

logger = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "REFERTRIAGE_EMBED_ENDPOINT"


class _RetryableResponse(Exception):
    pass


def endpoint_from_env() -> str:
    """
    Read the embedding endpoint from the environment.

    Raises:
        ValueError: If REFERTRIAGE_EMBED_ENDPOINT is not set
    """
    endpoint = os.getenv(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise ValueError(f"{ENDPOINT_ENV_VAR} environment variable is not set")
    return endpoint


def _post_batch(
    client: httpx.Client,
    url: str,
    batch: list[str],
    max_retries: int,
    backoff_seconds: float,
    sleep: Callable[[float], None],
) -> list[list[float]]:
    attempt = 0
    while True:
        try:
            response = client.post(url, json={"texts": batch})
            if response.status_code != 200:
                raise _RetryableResponse(f"HTTP {response.status_code}")
            payload = response.json()
            break
        except (httpx.TransportError, _RetryableResponse) as e:
            if attempt >= max_retries:
                raise EmbeddingServiceError(
                    f"embedding request failed after {attempt + 1} attempt(s): {e}"
                ) from e
            delay = backoff_seconds * (2 ** attempt)
            logger.warning("embedding request failed (%s); retrying in %.2fs", e, delay)
            sleep(delay)
            attempt += 1
        except ValueError as e:
            raise EmbeddingServiceError(f"response is not valid JSON: {e}") from e

    vectors = payload.get("vectors") if isinstance(payload, dict) else None
    if not isinstance(vectors, list):
        raise EmbeddingServiceError("response missing 'vectors' list")
    if len(vectors) != len(batch):
        raise EmbeddingServiceError(
            f"service returned {len(vectors)} vectors for {len(batch)} texts"
        )
    return vectors


def _parse_vector(vector) -> list[float]:
    if not isinstance(vector, list):
        raise EmbeddingServiceError(f"embedding must be a list, got {type(vector).__name__}")
    try:
        return [float(v) for v in vector]
    except (TypeError, ValueError) as e:
        raise EmbeddingServiceError(f"embedding has a non-numeric entry: {e}") from e


def fetch_remote_embeddings(
    endpoint: str,
    texts: list[str],
    batch_size: int = 32,
    record_ids: list[str] | None = None,
    client: httpx.Client | None = None,
    max_retries: int = 3,
    backoff_seconds: float = 0.5,
    timeout: float = 30.0,
    sleep: Callable[[float], None] = time.sleep,
) -> EmbeddingMatrix:
    """
    Embed texts through the remote service in sequential batches.

    Args:
        endpoint: Service base URL
        texts: Ordered texts; row i belongs to texts[i]
        batch_size: Texts per request
        record_ids: Row ids (default: "0", "1", ...)
        client: Injected httpx client (tests use a MockTransport)
        max_retries: Retries per batch after the first attempt
        backoff_seconds: First retry delay, doubled per retry
        timeout: Request timeout when the client is created here
        sleep: Delay function (injectable for tests)

    Returns:
        EmbeddingMatrix in request order

    Raises:
        ValueError: If batch_size < 1
        EmbeddingServiceError: Transport failure after retries, wrong vector
            count, or inconsistent dimensionality across batches
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if record_ids is None:
        record_ids = [str(i) for i in range(len(texts))]

    url = endpoint.rstrip("/") + "/embed"
    owns_client = client is None
    client = client or httpx.Client(timeout=timeout)

    rows: list[list[float]] = []
    dim: int | None = None
    try:
        for start in range(0, len(texts), batch_size):
            batch = list(texts[start:start + batch_size])
            for vector in _post_batch(client, url, batch, max_retries, backoff_seconds, sleep):
                vector = _parse_vector(vector)
                if dim is None:
                    dim = len(vector)
                if len(vector) != dim or dim == 0:
                    raise EmbeddingServiceError(
                        f"inconsistent embedding dimension: expected {dim}, got {len(vector)}"
                    )
                rows.append(vector)
    finally:
        if owns_client:
            client.close()

    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim or 1)
    return EmbeddingMatrix(record_ids=tuple(record_ids), vectors=vectors)
