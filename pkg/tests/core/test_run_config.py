"""
Unit tests for run configuration and the report envelope.
"""

import json

import pytest
from pydantic import ValidationError

from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.reports import (
    REPORT_SCHEMA_VERSION,
    build_report,
    load_report,
    report_schema,
    write_report,
)
from refertriage.app.core.run_config import RunConfig, build_run_config, load_config_file


def test_seed_is_required():
    """Test a config without a seed is rejected."""
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"data": "referrals.csv"})


def test_defaults():
    """Test documented defaults."""
    config = RunConfig(seed=1)

    assert config.k_folds == 5
    assert config.inner_folds == 3
    assert config.dim == 384
    assert config.balance == "smote"
    assert config.bootstrap_resamples == 1000
    assert config.threshold == 0.5


def test_unknown_keys_rejected():
    """Test misspelled options fail instead of being ignored."""
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"seed": 1, "kfolds": 10})


@pytest.mark.parametrize(
    "field,value",
    [
        ("balance", "oversample"),
        ("model", "svm"),
        ("models", []),
        ("noise_kinds", ["typo"]),
        ("noise_levels", [0.7]),
        ("k_folds", 1),
        ("threshold_grid_step", 0.3),
        ("threshold_grid_step", 0.015),
    ],
)
def test_invalid_values_rejected(field, value):
    """Test field validation."""
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"seed": 1, field: value})


def test_flag_overrides_win_over_file(tmp_path):
    """Test flags override the file and None means not given."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 3, "k_folds": 10, "model": "mlp"}), encoding="utf-8")

    config = build_run_config(load_config_file(str(path)), {"k_folds": 4, "model": None})

    assert config.seed == 3
    assert config.k_folds == 4
    assert config.model == "mlp"


def test_load_config_file_errors(tmp_path):
    """Test missing files and non-object documents."""
    with pytest.raises(FileNotFoundError):
        load_config_file(str(tmp_path / "none.json"))

    path = tmp_path / "list.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ValueError, match="JSON object"):
        load_config_file(str(path))


def test_component_specs_carry_seed():
    """Test derived specs use the master seed."""
    config = RunConfig(seed=42, balance="adasyn", k_neighbors=3, hyperparameters={"n_estimators": 10})

    assert config.resample_spec().strategy == "adasyn"
    assert config.resample_spec("none").strategy == "none"
    assert config.resample_spec().seed == 42
    assert config.bootstrap_spec().seed == 42
    spec = config.classifier()
    assert isinstance(spec, ClassifierSpec)
    assert spec["n_estimators"] == 10
    assert config.classifier("mlp").kind == "mlp"


def test_grid_flag_returns_forest_grid():
    """Test grid search swaps the fixed spec for the 81-point grid."""
    config = RunConfig(seed=0, grid=True)

    grid = config.classifier()

    assert isinstance(grid, list)
    assert len(grid) == 81


def test_report_round_trip(tmp_path):
    """Test a written report validates on reload with sorted keys."""
    report = build_report("stats", 7, {"seed": 7}, {"n_total": 3, "class1_pct": 33.33})
    path = tmp_path / "out" / "stats_report.json"

    write_report(report, str(path))
    reloaded = load_report(str(path))

    assert reloaded.schema_version == REPORT_SCHEMA_VERSION
    assert reloaded.payload == {"n_total": 3, "class1_pct": 33.33}
    text = path.read_text(encoding="utf-8")
    assert text.index('"config"') < text.index('"generated_at"') < text.index('"payload"')


def test_report_rejects_unknown_type():
    """Test report types are a closed set."""
    with pytest.raises(ValidationError):
        build_report("summary", 1, {}, {})


def test_report_schema_lists_envelope_fields():
    """Test the published schema names every envelope field."""
    schema = report_schema()

    assert set(schema["properties"]) == {
        "schema_version",
        "report_type",
        "generated_at",
        "seed",
        "config",
        "payload",
    }
