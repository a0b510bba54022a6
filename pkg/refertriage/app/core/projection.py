"""
Two-dimensional projections of embeddings for separability inspection.

PCA is computed here; non-linear layouts are produced elsewhere and read
back in as `external` projections so both flow through the same CSV.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from refertriage.app.core.dataset import ReferralDataset
from refertriage.app.core.errors import DataError

METHODS = ("pca", "external")


@dataclass(frozen=True, eq=False)
class Projection2D:
    record_ids: tuple[str, ...]
    coordinates: np.ndarray
    explained_variance_fractions: tuple[float, float] | None
    method_tag: str = "pca"

    def __post_init__(self):
        coordinates = np.asarray(self.coordinates, dtype=np.float64)
        if coordinates.ndim != 2 or coordinates.shape[1] != 2:
            raise ValueError(f"coordinates must be n x 2, got shape {coordinates.shape}")
        if coordinates.shape[0] != len(self.record_ids):
            raise ValueError(f"{coordinates.shape[0]} points for {len(self.record_ids)} record ids")
        if self.method_tag not in METHODS:
            raise ValueError(f"method_tag must be one of {METHODS}, got {self.method_tag!r}")
        fractions = self.explained_variance_fractions
        if fractions is not None:
            if any(not 0.0 <= f <= 1.0 for f in fractions) or sum(fractions) > 1.0 + 1e-9:
                raise ValueError(f"invalid explained variance fractions {fractions}")
        object.__setattr__(self, "record_ids", tuple(self.record_ids))
        object.__setattr__(self, "coordinates", coordinates)

    def to_dict(self) -> dict:
        return {
            "method": self.method_tag,
            "n_points": len(self.record_ids),
            "explained_variance_fractions": (
                list(self.explained_variance_fractions)
                if self.explained_variance_fractions is not None
                else None
            ),
        }


def pca_project(X: np.ndarray, record_ids: list[str] | None = None) -> Projection2D:
    """
    Project onto the top two principal directions.

    Each direction is oriented so its largest-magnitude loading is positive.

    Args:
        X: n x D matrix, n >= 3 and D >= 2
        record_ids: Row ids (defaults to "0".."n-1")

    Returns:
        Projection2D with explained fractions of total variance

    Raises:
        ValueError: Too few rows or columns, or zero total variance
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3 or X.shape[1] < 2:
        raise ValueError(f"pca_project needs n >= 3 rows and D >= 2 columns, got shape {X.shape}")
    if record_ids is None:
        record_ids = [str(i) for i in range(X.shape[0])]

    centered = X - X.mean(axis=0)
    covariance = centered.T @ centered / (X.shape[0] - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    total = float(np.trace(covariance))
    if total <= 0.0:
        raise ValueError("pca_project needs non-zero total variance")

    top = np.argsort(eigenvalues, kind="stable")[::-1][:2]
    directions = eigenvectors[:, top]
    for j in range(2):
        if directions[np.argmax(np.abs(directions[:, j])), j] < 0:
            directions[:, j] = -directions[:, j]

    fractions = tuple(float(min(1.0, max(0.0, eigenvalues[i] / total))) for i in top)
    if sum(fractions) > 1.0:
        fractions = tuple(f / sum(fractions) for f in fractions)

    return Projection2D(
        record_ids=tuple(record_ids),
        coordinates=centered @ directions,
        explained_variance_fractions=fractions,
        method_tag="pca",
    )


def load_external_projection(path: str, dataset: ReferralDataset) -> Projection2D:
    """
    Read externally computed coordinates (`record_id,x,y`, extra columns ignored).

    Raises:
        FileNotFoundError: If the file does not exist
        DataError: Missing columns, non-numeric coordinates, duplicate ids or
            dataset records without coordinates
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Projection file not found: {path}")

    points: dict[str, tuple[float, float]] = {}
    with open(file_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if not reader.fieldnames or not {"record_id", "x", "y"} <= set(reader.fieldnames):
            raise DataError("header must contain record_id, x, y", path=str(path))
        for row_number, row in enumerate(reader, start=1):
            record_id = (row["record_id"] or "").strip()
            if record_id in points:
                raise DataError(f"duplicate record_id {record_id!r}", row=row_number, path=str(path))
            try:
                points[record_id] = (float(row["x"]), float(row["y"]))
            except (TypeError, ValueError) as e:
                raise DataError(f"non-numeric coordinate: {e}", row=row_number, path=str(path)) from e

    missing = [rid for rid in dataset.record_ids if rid not in points]
    if missing:
        raise DataError(f"{len(missing)} record(s) have no coordinates, e.g. {missing[:5]}", path=str(path))

    return Projection2D(
        record_ids=tuple(dataset.record_ids),
        coordinates=np.array([points[rid] for rid in dataset.record_ids]),
        explained_variance_fractions=None,
        method_tag="external",
    )


def write_projection_csv(projection: Projection2D, labels: list[int], path: str) -> None:
    """Scatter CSV: record_id, x, y, label, method."""
    if len(labels) != len(projection.record_ids):
        raise ValueError(f"{len(labels)} labels for {len(projection.record_ids)} points")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["record_id", "x", "y", "label", "method"])
        for record_id, (x, y), label in zip(projection.record_ids, projection.coordinates, labels):
            writer.writerow([record_id, repr(float(x)), repr(float(y)), int(label), projection.method_tag])
