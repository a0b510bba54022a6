"""
Corpus preparation shared by the CLI and the experiment pipelines.
"""

import logging

from refertriage.app.core.dataset import ReferralDataset, enrich_hyde, load_code_dictionary, load_referrals
from refertriage.app.core.embedding_matrix import EmbeddedDataset
from refertriage.app.core.embedding_providers import embed_dataset
from refertriage.app.core.hashing_embedder import HashingEmbedderConfig

logger = logging.getLogger(__name__)


def load_corpus(data: str, dictionary: str | None = None, variant: str = "base") -> ReferralDataset:
    """
    Load referrals and apply the requested text variant.

    Args:
        data: Referral CSV path
        dictionary: Code dictionary CSV path (required for "hyde")
        variant: "base" or "hyde"

    Returns:
        ReferralDataset, enriched when variant is "hyde"

    Raises:
        ValueError: Unknown variant, or "hyde" without a dictionary
        FileNotFoundError / DataError: From the loaders
    """
    if variant not in ("base", "hyde"):
        raise ValueError(f"variant must be 'base' or 'hyde', got {variant!r}")
    dataset = load_referrals(data)
    if variant == "hyde":
        if not dictionary:
            raise ValueError("the hyde variant needs a code dictionary (--dictionary)")
        dataset = enrich_hyde(dataset, load_code_dictionary(dictionary))
    logger.info("loaded %d referrals (%s)", len(dataset), dataset.variant)
    return dataset


def make_embedder(
    provider: str = "hashing",
    dim: int = 384,
    endpoint: str | None = None,
    embeddings_path: str | None = None,
):
    """
    Bind provider settings into a dataset -> EmbeddedDataset callable.

    A remote provider without an explicit endpoint falls back to
    REFERTRIAGE_EMBED_ENDPOINT.
    """
    if provider == "remote" and not endpoint:
        from refertriage.app.services.embedding_client import endpoint_from_env

        endpoint = endpoint_from_env()
    hashing = HashingEmbedderConfig(dim=dim)

    def embed(dataset: ReferralDataset) -> EmbeddedDataset:
        return embed_dataset(
            dataset,
            provider=provider,
            hashing=hashing,
            endpoint=endpoint,
            embeddings_path=embeddings_path,
        )

    return embed
