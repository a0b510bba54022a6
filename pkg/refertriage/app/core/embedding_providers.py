"""
Embedding provider dispatch.

Turns a referral dataset into an EmbeddedDataset with one of the
interchangeable providers: built-in hashing, remote service, or a
precomputed embedding file.
"""

from refertriage.app.core.dataset import ReferralDataset
from refertriage.app.core.embedding_matrix import (
    EmbeddedDataset,
    align_embeddings,
    load_embedding_file,
)
from refertriage.app.core.hashing_embedder import HashingEmbedderConfig, embed_hashing

PROVIDERS = ("hashing", "remote", "file")


def embed_dataset(
    dataset: ReferralDataset,
    provider: str = "hashing",
    hashing: HashingEmbedderConfig | None = None,
    endpoint: str | None = None,
    batch_size: int = 32,
    embeddings_path: str | None = None,
) -> EmbeddedDataset:
    """
    Embed every record text with the chosen provider.

    Args:
        dataset: Corpus (its `enriched` flag sets the variant tag)
        provider: "hashing", "remote" or "file"
        hashing: Hashing embedder settings
        endpoint: Remote service URL (provider "remote")
        batch_size: Remote batch size
        embeddings_path: Precomputed vectors (provider "file")

    Returns:
        EmbeddedDataset aligned to dataset order

    Raises:
        ValueError: Unknown provider or missing provider settings
    """
    if provider == "hashing":
        matrix = embed_hashing(dataset.texts, hashing, record_ids=dataset.record_ids)
    elif provider == "remote":
        if not endpoint:
            raise ValueError("remote provider requires an endpoint")
        from refertriage.app.services.embedding_client import fetch_remote_embeddings

        matrix = fetch_remote_embeddings(
            endpoint, dataset.texts, batch_size=batch_size, record_ids=dataset.record_ids
        )
    elif provider == "file":
        if not embeddings_path:
            raise ValueError("file provider requires an embeddings path")
        matrix = load_embedding_file(embeddings_path)
    else:
        raise ValueError(f"unknown embedding provider {provider!r}; expected one of {PROVIDERS}")

    return align_embeddings(matrix, dataset)
