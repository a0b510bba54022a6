"""
Row-aligned embedding matrices and the embedding file format.

File format: UTF-8 CSV, header `record_id,d0,...,d{D-1}`, one row per
record, values written as shortest round-trip decimal text.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from refertriage.app.core.dataset import ReferralDataset
from refertriage.app.core.errors import DataError

VARIANTS = ("base", "hyde")


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """n x D real matrix whose row i belongs to record_ids[i]."""

    record_ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        if vectors.shape[0] != len(self.record_ids):
            raise ValueError(
                f"{vectors.shape[0]} vectors for {len(self.record_ids)} record ids"
            )
        if vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be positive")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors contain non-finite entries")
        object.__setattr__(self, "record_ids", tuple(self.record_ids))
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.record_ids)


@dataclass(frozen=True, eq=False)
class EmbeddedDataset:
    """Embedding matrix plus aligned binary labels and a Base/HyDE tag."""

    matrix: EmbeddingMatrix
    labels: np.ndarray
    variant_tag: str = "base"

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != len(self.matrix):
            raise ValueError(
                f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels "
                f"for {len(self.matrix)} vectors"
            )
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be binary (0/1)")
        if self.variant_tag not in VARIANTS:
            raise ValueError(f"variant_tag must be one of {VARIANTS}, got {self.variant_tag!r}")
        object.__setattr__(self, "labels", labels)

    @property
    def X(self) -> np.ndarray:
        return self.matrix.vectors

    @property
    def y(self) -> np.ndarray:
        return self.labels

    def __len__(self) -> int:
        return len(self.matrix)


def write_embedding_file(matrix: EmbeddingMatrix, path: str) -> None:
    """Write a matrix so load_embedding_file reproduces it bit-exactly."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["record_id", *(f"d{j}" for j in range(matrix.dim))])
        for record_id, row in zip(matrix.record_ids, matrix.vectors):
            writer.writerow([record_id, *(repr(float(v)) for v in row)])


def load_embedding_file(path: str) -> EmbeddingMatrix:
    """
    Load an embedding file.

    Raises:
        FileNotFoundError: If the file does not exist
        DataError: Bad header, row width != D, non-numeric or non-finite
            cell, duplicate id (row number in message)
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Embedding file not found: {path}")

    with open(file_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0].strip() != "record_id" or len(header) < 2:
            raise DataError("header must be 'record_id,d0,...'", path=str(path))
        dim = len(header) - 1
        expected = [f"d{j}" for j in range(dim)]
        if [h.strip() for h in header[1:]] != expected:
            raise DataError(f"header dimension columns must be d0..d{dim - 1}", path=str(path))

        ids: list[str] = []
        rows: list[list[float]] = []
        seen: set[str] = set()
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) - 1 != dim:
                raise DataError(
                    f"expected {dim} values, got {len(row) - 1}", row=row_number, path=str(path)
                )
            record_id = row[0].strip()
            if not record_id:
                raise DataError("empty record_id", row=row_number, path=str(path))
            if record_id in seen:
                raise DataError(
                    f"duplicate record_id {record_id!r}", row=row_number, path=str(path)
                )
            seen.add(record_id)
            try:
                values = [float(cell) for cell in row[1:]]
            except ValueError as e:
                raise DataError(f"non-numeric value: {e}", row=row_number, path=str(path)) from e
            if not all(math.isfinite(v) for v in values):
                raise DataError("non-finite value", row=row_number, path=str(path))
            ids.append(record_id)
            rows.append(values)

    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingMatrix(record_ids=tuple(ids), vectors=vectors)


def align_embeddings(matrix: EmbeddingMatrix, dataset: ReferralDataset) -> EmbeddedDataset:
    """
    Join an embedding matrix to dataset labels by record id.

    Rows follow dataset order; extra matrix rows are ignored.

    Raises:
        DataError: If a dataset record has no embedding row
    """
    position = {rid: i for i, rid in enumerate(matrix.record_ids)}
    missing = [rid for rid in dataset.record_ids if rid not in position]
    if missing:
        raise DataError(
            f"{len(missing)} record(s) have no embedding, e.g. {missing[:5]}"
        )
    order = [position[rid] for rid in dataset.record_ids]
    aligned = EmbeddingMatrix(
        record_ids=tuple(dataset.record_ids), vectors=matrix.vectors[order]
    )
    return EmbeddedDataset(
        matrix=aligned, labels=np.array(dataset.labels), variant_tag=dataset.variant
    )
