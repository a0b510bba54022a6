"""
Referral triage experiment CLI.

One subcommand per experiment. Each run writes a versioned JSON report
(plus plot-ready CSVs) under the output directory and prints a JSON status
document to stdout. Logs go to stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from pydantic import ValidationError

LOCK_FILE = ".refertriage.lock"

COMMANDS = (
    "stats",
    "embed",
    "cv",
    "noise-sweep",
    "balance-compare",
    "model-compare",
    "embed-compare",
    "threshold-sweep",
    "project",
    "simulate",
    "schema",
)


class UsageError(Exception):
    """Invalid invocation (exit code 1)."""


def _emit(result: dict) -> None:
    print(json.dumps(result, indent=2, sort_keys=True))


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its fields")
    common.add_argument("--seed", type=int, help="Master seed (required unless set in --config)")
    common.add_argument("--data", help="Referral CSV (record_id,diagnosis_text,icd10_codes,label)")
    common.add_argument("--dictionary", help="ICD-10 code,description CSV (needed for --variant hyde)")
    common.add_argument(
        "--embeddings",
        action="append",
        help="Embedding file (provider file; repeat for embed-compare)",
    )
    common.add_argument("--provider", choices=["hashing", "remote", "file"])
    common.add_argument("--dim", type=int, help="Hashing embedder dimension (default: 384)")
    common.add_argument("--variant", choices=["base", "hyde"])
    common.add_argument("--balance", help="smote, adasyn, undersample or none (default: smote)")
    common.add_argument("--model", help="random_forest, gradient_boosting, linear_margin or mlp")
    common.add_argument("--grid", action="store_const", const=True, help="Nested grid search")
    common.add_argument("--k-folds", type=int, dest="k_folds")
    common.add_argument("--bootstrap-resamples", type=int, dest="bootstrap_resamples")
    common.add_argument("--alpha", type=float)
    common.add_argument("--threshold", type=float, help="Decision threshold (default: 0.5)")
    common.add_argument("--threshold-grid-step", type=float, dest="threshold_grid_step")
    common.add_argument("--noise-kind", action="append", dest="noise_kinds")
    common.add_argument("--noise-level", action="append", type=float, dest="noise_levels")
    common.add_argument("--noise-repeats", type=int, dest="noise_repeats")
    common.add_argument("--coordinates", help="Externally computed 2-D coordinates CSV")
    common.add_argument("--scenario", help="Capture scenario JSON")
    common.add_argument("--n-baseline", type=int, dest="n_baseline")
    common.add_argument("--n-model", type=int, dest="n_model")
    common.add_argument("--n-jobs", type=int, dest="n_jobs")
    common.add_argument("--progress", action="store_const", const=True)
    common.add_argument("--out", help="Output directory (default: out)")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level for stderr (default: WARNING)",
    )

    parser = argparse.ArgumentParser(
        prog="python -m refertriage.scripts.run",
        description="Referral-to-procedure prediction experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Corpus statistics
  python -m refertriage.scripts.run stats --data referrals.csv --seed 7

  # Cross-validated forest with SMOTE and nested grid search
  python -m refertriage.scripts.run cv --data referrals.csv --seed 7 --grid --out ./results

  # Capture-efficiency table
  python -m refertriage.scripts.run simulate --scenario scenario.json --seed 7 \\
    --n-baseline 2086 --n-model 2086
""",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])
    return parser


_OVERRIDE_FIELDS = (
    "seed",
    "data",
    "dictionary",
    "embeddings",
    "provider",
    "dim",
    "variant",
    "balance",
    "model",
    "grid",
    "k_folds",
    "bootstrap_resamples",
    "alpha",
    "threshold",
    "threshold_grid_step",
    "noise_kinds",
    "noise_levels",
    "noise_repeats",
    "coordinates",
    "n_baseline",
    "n_model",
    "n_jobs",
    "progress",
    "out",
)


def _resolve_config(args: argparse.Namespace):
    from refertriage.app.core.run_config import build_run_config, load_config_file

    base = load_config_file(args.config) if args.config else {}
    overrides = {name: getattr(args, name) for name in _OVERRIDE_FIELDS}
    if args.scenario:
        overrides["scenario"] = load_config_file(args.scenario)
    if overrides["seed"] is None and base.get("seed") is None:
        raise UsageError("a seed is required (--seed or \"seed\" in --config)")
    try:
        return build_run_config(base, overrides)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}") from e


def _require_data(config) -> str:
    if not config.data:
        raise UsageError("--data is required for this command")
    return config.data


def _embedded(config):
    from refertriage.app.core.corpus import load_corpus, make_embedder

    dataset = load_corpus(_require_data(config), config.dictionary, config.variant)
    if config.provider == "file" and not config.embeddings:
        raise UsageError("--embeddings is required with --provider file")
    embed = make_embedder(
        provider=config.provider,
        dim=config.dim,
        endpoint=config.endpoint,
        embeddings_path=config.embeddings[0] if config.embeddings else None,
    )
    return dataset, embed(dataset)


def _run_cv(config, embedded):
    from refertriage.app.core.cross_validation import run_cv
    from refertriage.app.core.folds import stratified_folds

    plan = stratified_folds(embedded.y, config.k_folds, config.seed)
    return run_cv(
        embedded,
        config.classifier(),
        config.resample_spec(),
        plan,
        config.bootstrap_spec(),
        threshold=config.threshold,
        inner_folds=config.inner_folds,
        n_jobs=config.n_jobs,
    )


def _cmd_stats(config, out: Path) -> tuple[dict, list[str]]:
    from refertriage.app.core.dataset import describe, load_code_dictionary, load_referrals, missing_codes

    dataset = load_referrals(_require_data(config))
    payload = {"summary": describe(dataset).to_dict()}
    if config.dictionary:
        missing = missing_codes(dataset, load_code_dictionary(config.dictionary))
        payload["missing_codes"] = missing
        payload["n_missing_codes"] = len(missing)
    return payload, []


def _cmd_embed(config, out: Path) -> tuple[dict, list[str]]:
    from refertriage.app.core.embedding_matrix import write_embedding_file

    dataset, embedded = _embedded(config)
    path = out / f"embeddings_{embedded.variant_tag}.csv"
    write_embedding_file(embedded.matrix, str(path))
    payload = {
        "n_records": len(embedded),
        "dim": embedded.matrix.dim,
        "variant": embedded.variant_tag,
        "provider": config.provider,
    }
    return payload, [str(path)]


def _cmd_cv(config, out: Path) -> tuple[dict, list[str]]:
    _, embedded = _embedded(config)
    return _run_cv(config, embedded).to_dict(), []


def _cmd_noise_sweep(config, out: Path) -> tuple[dict, list[str]]:
    from pipelines.noise_sweep import noise_sweep, write_noise_curve_csv
    from refertriage.app.core.corpus import load_corpus, make_embedder

    if config.provider == "file":
        raise UsageError("noise-sweep re-embeds perturbed text; use --provider hashing or remote")
    dataset = load_corpus(_require_data(config), config.dictionary, config.variant)
    embed = make_embedder(config.provider, config.dim, config.endpoint)
    result = noise_sweep(
        dataset,
        embed,
        config.classifier(config.model),
        config.resample_spec(),
        seeds=[config.seed + r for r in range(config.noise_repeats)],
        kinds=config.noise_kinds,
        levels=config.noise_levels,
        k_folds=config.k_folds,
        boot=config.bootstrap_spec(),
        progress=config.progress,
        n_jobs=config.n_jobs,
    )
    path = out / "noise_curve.csv"
    write_noise_curve_csv(result, str(path))
    return result.to_dict(), [str(path)]


def _cmd_balance_compare(config, out: Path) -> tuple[dict, list[str]]:
    from pipelines.comparisons import compare_balancing

    _, embedded = _embedded(config)
    result = compare_balancing(
        embedded,
        config.classifier(config.model),
        strategies=config.balances,
        k_neighbors=config.k_neighbors,
        target=config.balance_target,
        k_folds=config.k_folds,
        seed=config.seed,
        boot=config.bootstrap_spec(),
        progress=config.progress,
        n_jobs=config.n_jobs,
    )
    return result.to_dict(), []


def _cmd_model_compare(config, out: Path) -> tuple[dict, list[str]]:
    from pipelines.comparisons import compare_models

    _, embedded = _embedded(config)
    result = compare_models(
        embedded,
        config.resample_spec(),
        kinds=config.models,
        specs={config.model: config.classifier(config.model)},
        k_folds=config.k_folds,
        seed=config.seed,
        boot=config.bootstrap_spec(),
        progress=config.progress,
        n_jobs=config.n_jobs,
    )
    return result.to_dict(), []


def _cmd_embed_compare(config, out: Path) -> tuple[dict, list[str]]:
    from pipelines.comparisons import compare_embeddings
    from refertriage.app.core.corpus import load_corpus
    from refertriage.app.core.embedding_matrix import align_embeddings, load_embedding_file

    if len(config.embeddings) < 2:
        raise UsageError("embed-compare needs at least two --embeddings files")
    dataset = load_corpus(_require_data(config), config.dictionary, config.variant)
    embedded_sets = {}
    for path in config.embeddings:
        name = Path(path).stem
        if name in embedded_sets:
            name = f"{name}_{len(embedded_sets)}"
        embedded_sets[name] = align_embeddings(load_embedding_file(path), dataset)
    result = compare_embeddings(
        embedded_sets,
        config.classifier(config.model),
        config.resample_spec(),
        k_folds=config.k_folds,
        seed=config.seed,
        boot=config.bootstrap_spec(),
        stats=config.stats_config(),
        progress=config.progress,
        n_jobs=config.n_jobs,
    )
    return result.to_dict(), []


def _cmd_threshold_sweep(config, out: Path) -> tuple[dict, list[str]]:
    from refertriage.app.core.threshold_sweep import threshold_sweep, write_threshold_curve_csv

    _, embedded = _embedded(config)
    report = _run_cv(config, embedded)
    curve = threshold_sweep(report.fold_predictions(), config.threshold_grid_step)
    path = out / "threshold_curve.csv"
    write_threshold_curve_csv(curve, str(path))
    payload = {
        "curve": curve.to_dict(),
        "cv_means": {m: s.mean for m, s in report.summary.items()},
    }
    return payload, [str(path)]


def _cmd_project(config, out: Path) -> tuple[dict, list[str]]:
    from refertriage.app.core.projection import load_external_projection, pca_project, write_projection_csv

    if config.coordinates:
        from refertriage.app.core.corpus import load_corpus

        dataset = load_corpus(_require_data(config), config.dictionary, config.variant)
        projection = load_external_projection(config.coordinates, dataset)
    else:
        dataset, embedded = _embedded(config)
        projection = pca_project(embedded.X, dataset.record_ids)
    path = out / f"projection_{projection.method_tag}.csv"
    write_projection_csv(projection, dataset.labels, str(path))
    return projection.to_dict(), [str(path)]


def _cmd_simulate(config, out: Path) -> tuple[dict, list[str]]:
    from refertriage.app.core.capture_economics import compare_rates, simulate_capture, write_capture_csv

    if config.scenario is None:
        raise UsageError("simulate needs a capture scenario (--scenario or \"scenario\" in --config)")
    scenario = config.scenario.to_scenario()
    rows = simulate_capture(scenario)
    path = out / "capture_table.csv"
    write_capture_csv(rows, str(path))

    payload = {"scenario": scenario.to_dict(), "rows": [r.to_dict() for r in rows], "p_value": None}
    if config.n_baseline is not None and config.n_model is not None:
        payload["p_value"] = compare_rates(scenario, config.n_baseline, config.n_model)
        payload["test"] = "two_proportion_z"
    return payload, [str(path)]


_HANDLERS = {
    "stats": _cmd_stats,
    "embed": _cmd_embed,
    "cv": _cmd_cv,
    "noise-sweep": _cmd_noise_sweep,
    "balance-compare": _cmd_balance_compare,
    "model-compare": _cmd_model_compare,
    "embed-compare": _cmd_embed_compare,
    "threshold-sweep": _cmd_threshold_sweep,
    "project": _cmd_project,
    "simulate": _cmd_simulate,
}


def _acquire_lock(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_FILE
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RuntimeError(f"output directory is in use by another run: {out} (remove {lock} if stale)")
    with os.fdopen(fd, "w") as f:
        f.write(str(os.getpid()))
    return lock


def main(argv=None):
    """
    Main CLI entry point.

    Args:
        argv: Command line arguments (for testing)

    Returns:
        Exit code (0=success, 1=usage error, 2=data or runtime error)
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )

    if args.command == "schema":
        from refertriage.app.core.reports import REPORT_SCHEMA_VERSION, report_schema

        _emit({"status": "success", "schema_version": REPORT_SCHEMA_VERSION, "schema": report_schema()})
        return 0

    try:
        config = _resolve_config(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        _emit({"status": "error", "error": str(e), "error_type": "UsageError"})
        return 1
    except (ValueError, FileNotFoundError) as e:
        _emit({"status": "error", "error": str(e), "error_type": type(e).__name__})
        return 2

    lock = None
    try:
        from refertriage.app.core.reports import build_report, write_report

        out = Path(config.out)
        lock = _acquire_lock(out)
        report_type = args.command.replace("-", "_")
        payload, outputs = _HANDLERS[args.command](config, out)

        report = build_report(report_type, config.seed, config.model_dump(mode="json"), payload)
        report_path = out / f"{report_type}_report.json"
        write_report(report, str(report_path))

        _emit(
            {
                "status": "success",
                "command": args.command,
                "report_path": str(report_path),
                "outputs": outputs,
            }
        )
        return 0

    except UsageError as e:
        parser.print_usage(sys.stderr)
        _emit({"status": "error", "error": str(e), "error_type": "UsageError"})
        return 1
    except Exception as e:
        logging.getLogger(__name__).debug("run failed", exc_info=True)
        _emit({"status": "error", "error": str(e), "error_type": type(e).__name__})
        return 2
    finally:
        if lock is not None:
            lock.unlink(missing_ok=True)


if __name__ == "__main__":
    sys.exit(main())
