"""
Referral corpus domain model.

Loads referral CSV exports and ICD-10-CM description dictionaries, appends
code descriptions to diagnostic text (HyDE enrichment) and computes the
descriptive statistics reported for a corpus.
"""

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

from refertriage.app.core.errors import DataError

logger = logging.getLogger(__name__)

ENRICHMENT_SEPARATOR = " | "
CODE_SEPARATOR = ";"


@dataclass(frozen=True)
class ReferralSchema:
    """Column names of a referral export."""

    record_id: str = "record_id"
    diagnosis_text: str = "diagnosis_text"
    icd10_codes: str = "icd10_codes"
    label: str = "label"

    def columns(self) -> list[str]:
        return [self.record_id, self.diagnosis_text, self.icd10_codes, self.label]


@dataclass(frozen=True)
class ReferralRecord:
    """
    One diagnostic entry with its binary procedure label.

    label: 0 = no procedure, 1 = with procedure.
    """

    record_id: str
    diagnosis_text: str
    icd10_codes: tuple[str, ...]
    label: int

    def __post_init__(self):
        if not self.record_id:
            raise ValueError("record_id must be non-empty")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if self.diagnosis_text is None:
            object.__setattr__(self, "diagnosis_text", "")


@dataclass(frozen=True)
class CodeDictionary:
    """ICD-10-CM code -> long description."""

    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for code, description in self.entries.items():
            if not code:
                raise ValueError("dictionary code must be non-empty")
            if not description or not description.strip():
                raise ValueError(f"description for code {code!r} must be non-empty")

    def get(self, code: str) -> str | None:
        return self.entries.get(code)

    def __contains__(self, code: str) -> bool:
        return code in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ReferralDataset:
    """
    Ordered referral corpus.

    `enriched` marks datasets whose text already carries appended code
    descriptions, so Base and HyDE variants stay distinguishable downstream.
    """

    records: tuple[ReferralRecord, ...]
    enriched: bool = False

    def __post_init__(self):
        seen = set()
        for record in self.records:
            if record.record_id in seen:
                raise ValueError(f"duplicate record_id {record.record_id!r}")
            seen.add(record.record_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ReferralRecord]:
        return iter(self.records)

    @property
    def record_ids(self) -> list[str]:
        return [r.record_id for r in self.records]

    @property
    def texts(self) -> list[str]:
        return [r.diagnosis_text for r in self.records]

    @property
    def labels(self) -> list[int]:
        return [r.label for r in self.records]

    @property
    def variant(self) -> str:
        return "hyde" if self.enriched else "base"

    def subset(self, record_ids: Iterable[str]) -> "ReferralDataset":
        """Records whose id is in record_ids, original order kept."""
        wanted = set(record_ids)
        return ReferralDataset(
            records=tuple(r for r in self.records if r.record_id in wanted),
            enriched=self.enriched,
        )

    def with_texts(self, texts: list[str], enriched: bool | None = None) -> "ReferralDataset":
        """Copy with replaced diagnosis texts (ids, codes and labels untouched)."""
        if len(texts) != len(self.records):
            raise ValueError(
                f"expected {len(self.records)} texts, got {len(texts)}"
            )
        return ReferralDataset(
            records=tuple(
                replace(r, diagnosis_text=t) for r, t in zip(self.records, texts)
            ),
            enriched=self.enriched if enriched is None else enriched,
        )

    def with_labels(self, labels: list[int]) -> "ReferralDataset":
        """Copy with replaced labels."""
        if len(labels) != len(self.records):
            raise ValueError(
                f"expected {len(self.records)} labels, got {len(labels)}"
            )
        return ReferralDataset(
            records=tuple(
                replace(r, label=int(y)) for r, y in zip(self.records, labels)
            ),
            enriched=self.enriched,
        )


@dataclass(frozen=True)
class DatasetSummary:
    """Descriptive statistics of a corpus: class balance and text length."""

    n_total: int
    n_class0: int
    n_class1: int
    total_chars: int
    total_words: int
    avg_chars: float
    avg_words: float
    minority_fraction: float

    def to_dict(self) -> dict:
        """Convert to JSON-serializable dict, percentages included."""
        return {
            "n_total": self.n_total,
            "n_class0": self.n_class0,
            "n_class1": self.n_class1,
            "class0_pct": round(100.0 * self.n_class0 / self.n_total, 2),
            "class1_pct": round(100.0 * self.n_class1 / self.n_total, 2),
            "total_chars": self.total_chars,
            "total_words": self.total_words,
            "avg_chars": self.avg_chars,
            "avg_words": self.avg_words,
            "minority_fraction": self.minority_fraction,
        }


def _parse_codes(cell: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in cell.split(CODE_SEPARATOR) if c.strip())


def _parse_label(cell: str, row: int, path: str) -> int:
    value = (cell or "").strip()
    if value not in ("0", "1"):
        raise DataError(f"label must be 0 or 1, got {value!r}", row=row, path=path)
    return int(value)


def load_referrals(path: str, schema: ReferralSchema | None = None) -> ReferralDataset:
    """
    Load a referral export.

    Missing or blank text and code cells become empty values; records keep
    file order.

    Args:
        path: UTF-8 CSV with a header row
        schema: Column names (default `record_id,diagnosis_text,icd10_codes,label`)

    Returns:
        ReferralDataset (not enriched)

    Raises:
        FileNotFoundError: If the file does not exist
        DataError: Missing header/columns, wrong column count, non-binary
            label, empty or duplicate record id (row number in message)
    """
    schema = schema or ReferralSchema()
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Referral file not found: {path}")

    try:
        with open(file_path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise DataError(f"unreadable referral file: {e}", path=str(path)) from e

    if not rows:
        raise DataError("missing header row", path=str(path))

    header = [h.strip() for h in rows[0]]
    missing = [c for c in schema.columns() if c not in header]
    if missing:
        raise DataError(f"header missing columns {missing}", path=str(path))
    index = {name: header.index(name) for name in schema.columns()}

    records = []
    seen: set[str] = set()
    for row_number, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(
                f"expected {len(header)} columns, got {len(row)}",
                row=row_number,
                path=str(path),
            )
        record_id = row[index[schema.record_id]].strip()
        if not record_id:
            raise DataError("empty record_id", row=row_number, path=str(path))
        if record_id in seen:
            raise DataError(
                f"duplicate record_id {record_id!r}", row=row_number, path=str(path)
            )
        seen.add(record_id)

        text = row[index[schema.diagnosis_text]] or ""
        if not text.strip():
            text = ""

        records.append(
            ReferralRecord(
                record_id=record_id,
                diagnosis_text=text,
                icd10_codes=_parse_codes(row[index[schema.icd10_codes]] or ""),
                label=_parse_label(row[index[schema.label]], row_number, str(path)),
            )
        )

    return ReferralDataset(records=tuple(records))


def write_referrals(
    dataset: ReferralDataset, path: str, schema: ReferralSchema | None = None
) -> None:
    """Write a dataset in the format read by load_referrals."""
    schema = schema or ReferralSchema()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(schema.columns())
        for r in dataset:
            writer.writerow(
                [r.record_id, r.diagnosis_text, CODE_SEPARATOR.join(r.icd10_codes), r.label]
            )


def load_code_dictionary(path: str) -> CodeDictionary:
    """
    Load an ICD-10-CM description dictionary (`code,description` CSV).

    Raises:
        FileNotFoundError: If the file does not exist
        DataError: Missing header, duplicate code or blank description
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Code dictionary not found: {path}")

    with open(file_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["code", "description"]:
            raise DataError("header must be 'code,description'", path=str(path))

        entries: dict[str, str] = {}
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(
                    f"expected 2 columns, got {len(row)}", row=row_number, path=str(path)
                )
            code, description = row[0].strip(), row[1].strip()
            if not code:
                raise DataError("empty code", row=row_number, path=str(path))
            if code in entries:
                raise DataError(f"duplicate code {code!r}", row=row_number, path=str(path))
            if not description:
                raise DataError(
                    f"empty description for {code!r}", row=row_number, path=str(path)
                )
            entries[code] = description

    return CodeDictionary(entries=entries)


def _dedupe(codes: Iterable[str]) -> list[str]:
    seen = set()
    ordered = []
    for code in codes:
        if code not in seen:
            seen.add(code)
            ordered.append(code)
    return ordered


def missing_codes(dataset: ReferralDataset, dictionary: CodeDictionary) -> dict[str, int]:
    """Count occurrences of record codes absent from the dictionary."""
    counts: Counter[str] = Counter()
    for record in dataset:
        for code in _dedupe(record.icd10_codes):
            if code not in dictionary:
                counts[code] += 1
    return dict(sorted(counts.items()))


def enrich_hyde(dataset: ReferralDataset, dictionary: CodeDictionary) -> ReferralDataset:
    """
    Append ICD-10-CM descriptions of each record's codes to its text.

    Descriptions follow code order, each code at most once, joined to the
    original text with " | ". Records without any known code keep their
    text. Codes absent from the dictionary are skipped and summarized in a
    warning.

    Args:
        dataset: Base (un-enriched) dataset
        dictionary: Code descriptions

    Returns:
        New dataset flagged enriched; the input is not modified

    Raises:
        ValueError: If the dataset is already enriched
    """
    if dataset.enriched:
        raise ValueError("dataset is already enriched")

    texts = []
    for record in dataset:
        descriptions = [
            dictionary.get(code)
            for code in _dedupe(record.icd10_codes)
            if code in dictionary
        ]
        if descriptions:
            texts.append(
                ENRICHMENT_SEPARATOR.join([record.diagnosis_text, *descriptions])
            )
        else:
            texts.append(record.diagnosis_text)

    missing = missing_codes(dataset, dictionary)
    if missing:
        logger.warning(
            "enrichment skipped %d unknown code(s) across %d occurrence(s): %s",
            len(missing),
            sum(missing.values()),
            ", ".join(list(missing)[:10]),
        )

    return dataset.with_texts(texts, enriched=True)


def describe(dataset: ReferralDataset) -> DatasetSummary:
    """
    Compute corpus statistics over diagnosis text.

    Words are maximal runs of non-whitespace characters.

    Raises:
        ValueError: If the dataset is empty
    """
    n_total = len(dataset)
    if n_total == 0:
        raise ValueError("cannot describe an empty dataset")

    n_class1 = sum(dataset.labels)
    total_chars = sum(len(t) for t in dataset.texts)
    total_words = sum(len(t.split()) for t in dataset.texts)

    return DatasetSummary(
        n_total=n_total,
        n_class0=n_total - n_class1,
        n_class1=n_class1,
        total_chars=total_chars,
        total_words=total_words,
        avg_chars=total_chars / n_total,
        avg_words=total_words / n_total,
        minority_fraction=n_class1 / n_total,
    )
