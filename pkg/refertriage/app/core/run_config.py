"""
Run configuration for the command-line experiments.

Loaded from an optional JSON file, then overridden flag by flag. The seed
has no default: every run must name it.
"""

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from refertriage.app.core.bootstrap import BootstrapSpec
from refertriage.app.core.capture_economics import CaptureScenarioConfig
from refertriage.app.core.classifier_spec import KINDS, ClassifierSpec, default_spec, forest_grid
from refertriage.app.core.hashing_embedder import HashingEmbedderConfig
from refertriage.app.core.perturb import DEFAULT_LEVELS, NOISE_KINDS
from refertriage.app.core.resample import STRATEGIES, ResampleSpec
from refertriage.app.core.significance import StatsConfig
from refertriage.app.core.threshold_sweep import DEFAULT_GRID_STEP, threshold_grid


class RunConfig(BaseModel):
    """Everything one CLI run needs; echoed verbatim into its report."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(..., description="Master seed for every random stream.")
    data: str | None = Field(default=None, description="Referral CSV.")
    dictionary: str | None = Field(default=None, description="ICD-10 code,description CSV.")
    embeddings: list[str] = Field(default_factory=list, description="Precomputed embedding files.")
    provider: Literal["hashing", "remote", "file"] = "hashing"
    dim: int = Field(default=384, ge=1, description="Hashing embedder dimension.")
    endpoint: str | None = Field(default=None, description="Remote embedding service URL.")
    variant: Literal["base", "hyde"] = "base"

    balance: str = Field(default="smote", description="Rebalancing strategy for cv.")
    k_neighbors: int = Field(default=5, ge=1)
    balance_target: float = Field(default=1.0, gt=0.0, le=1.0)
    balances: list[str] = Field(default_factory=lambda: list(STRATEGIES))

    model: str = Field(default="random_forest", description="Classifier family for cv.")
    hyperparameters: dict[str, Any] = Field(default_factory=dict)
    grid: bool = Field(default=False, description="Nested grid search over the forest grid.")
    models: list[str] = Field(default_factory=lambda: list(KINDS))

    k_folds: int = Field(default=5, ge=2)
    inner_folds: int = Field(default=3, ge=2)
    bootstrap_resamples: int = Field(default=1000, ge=1)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    threshold_grid_step: float = Field(default=DEFAULT_GRID_STEP, gt=0.0, le=1.0)

    noise_kinds: list[str] = Field(default_factory=lambda: list(NOISE_KINDS))
    noise_levels: list[float] = Field(default_factory=lambda: list(DEFAULT_LEVELS))
    noise_repeats: int = Field(default=1, ge=1, description="Seeds averaged per noise point.")

    coordinates: str | None = Field(default=None, description="External 2-D coordinates CSV.")
    scenario: CaptureScenarioConfig | None = None
    n_baseline: int | None = Field(default=None, ge=1)
    n_model: int | None = Field(default=None, ge=1)

    n_jobs: int = Field(default=1, ge=1)
    progress: bool = False
    out: str = "out"

    @field_validator("balance")
    @classmethod
    def _known_strategy(cls, value: str) -> str:
        if value not in STRATEGIES:
            raise ValueError(f"balance must be one of {STRATEGIES}")
        return value

    @field_validator("balances")
    @classmethod
    def _known_strategies(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in STRATEGIES]
        if unknown or not value:
            raise ValueError(f"balances must be a non-empty subset of {STRATEGIES}")
        return value

    @field_validator("model")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        if value not in KINDS:
            raise ValueError(f"model must be one of {KINDS}")
        return value

    @field_validator("models")
    @classmethod
    def _known_kinds(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in KINDS]
        if unknown or not value:
            raise ValueError(f"models must be a non-empty subset of {KINDS}")
        return value

    @field_validator("threshold_grid_step")
    @classmethod
    def _divides_unit_interval(cls, value: float) -> float:
        threshold_grid(value)
        return value

    @field_validator("noise_kinds")
    @classmethod
    def _known_noise(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in NOISE_KINDS]
        if unknown or not value:
            raise ValueError(f"noise_kinds must be a non-empty subset of {NOISE_KINDS}")
        return value

    @field_validator("noise_levels")
    @classmethod
    def _levels_in_range(cls, value: list[float]) -> list[float]:
        if not value or any(not 0.0 <= v <= 0.5 for v in value):
            raise ValueError("noise_levels must be non-empty and lie in [0, 0.5]")
        return value

    def hashing_config(self) -> HashingEmbedderConfig:
        return HashingEmbedderConfig(dim=self.dim)

    def resample_spec(self, strategy: str | None = None) -> ResampleSpec:
        return ResampleSpec(
            strategy=strategy or self.balance,
            k_neighbors=self.k_neighbors,
            target=self.balance_target,
            seed=self.seed,
        )

    def classifier(self, kind: str | None = None) -> ClassifierSpec | list[ClassifierSpec]:
        """Fixed spec, or the forest grid when grid search is on."""
        if self.grid and kind is None:
            return forest_grid(self.seed)
        if kind is not None and kind != self.model:
            return default_spec(kind, self.seed)
        return ClassifierSpec(kind=self.model, hyperparameters=dict(self.hyperparameters), seed=self.seed)

    def bootstrap_spec(self) -> BootstrapSpec:
        return BootstrapSpec(n_resamples=self.bootstrap_resamples, alpha=self.alpha, seed=self.seed)

    def stats_config(self) -> StatsConfig:
        return StatsConfig(alpha=self.alpha)


def load_config_file(path: str) -> dict:
    """
    Read a JSON config document.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If it is not a JSON object
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(file_path, "r", encoding="utf-8") as f:
        document = json.load(f)
    if not isinstance(document, dict):
        raise ValueError(f"config must be a JSON object: {path}")
    return document


def build_run_config(base: dict, overrides: dict) -> RunConfig:
    """Merge flag overrides (None = not given) over a config document and validate."""
    merged = dict(base)
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.model_validate(merged)
