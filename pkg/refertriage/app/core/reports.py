"""
Versioned JSON report envelope.

Every CLI report is one envelope: schema version, report type, generation
timestamp, master seed, the full effective config and the payload. Keys are
written sorted so two runs with the same seed differ only in
`generated_at`.
"""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA_VERSION = 1

ReportType = Literal[
    "stats",
    "embed",
    "cv",
    "noise_sweep",
    "balance_compare",
    "model_compare",
    "embed_compare",
    "threshold_sweep",
    "project",
    "simulate",
]


class ReportEnvelope(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, description="Bumped on any key change.")
    report_type: ReportType
    generated_at: str = Field(..., description="UTC ISO-8601 timestamp; the only run-varying field.")
    seed: int
    config: dict[str, Any]
    payload: dict[str, Any]


def report_schema() -> dict:
    """Published JSON schema of the report envelope."""
    return ReportEnvelope.model_json_schema()


def build_report(report_type: str, seed: int, config: dict, payload: dict) -> ReportEnvelope:
    return ReportEnvelope(
        report_type=report_type,
        generated_at=datetime.now(timezone.utc).isoformat(),
        seed=seed,
        config=config,
        payload=payload,
    )


def write_report(report: ReportEnvelope, path: str) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(report.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")


def load_report(path: str) -> ReportEnvelope:
    """
    Read and validate a report file.

    Raises:
        FileNotFoundError: If the file does not exist
        pydantic.ValidationError: If it does not match the envelope schema
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Report file not found: {path}")
    with open(file_path, "r", encoding="utf-8") as f:
        return ReportEnvelope.model_validate(json.load(f))
