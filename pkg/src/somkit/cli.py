"""Command-line entry point: train, predict, evaluate, crossval, export-maps.

Every run resolves its full effective configuration (defaults, config file,
explicit flags, master seed) into a record that suffices to reproduce the
run: commands with a primary output file write it as a JSON sidecar, and
evaluation reports carry it as a trailing ``resolved_config`` line. Exit
codes: 0 success, 1 usage or validation error, 2 runtime or data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .datasets import (
    DatasetError,
    LabeledDataset,
    k_fold,
    load_csv,
    minmax_scale,
)
from .metrics import (
    EvaluationReport,
    average_accuracy,
    cohens_kappa,
    confusion,
    mean_report,
    overall_accuracy,
    r_squared,
)
from .model_io import SomModel, config_to_dict, load_model, save_model
from .schedules import ScheduleSpec
from .som import SomConfig, bmu_histogram, fit_unsupervised
from .supervised import fit_classifier, fit_regressor
from .seeding import PHASES, SEED_SCHEME, phase_rng

HEAD_KINDS = ("none", "regression", "classification")

_CONFIG_DEFAULTS = {
    "n_row": 10,
    "n_column": 10,
    "n_iter_unsupervised": 1000,
    "n_iter_supervised": 1000,
    "metric": "euclidean",
    "lr_schedule": "start-end",
    "lr_start": 0.5,
    "lr_end": 0.05,
    "radius_schedule": "linear",
    "radius_start": None,  # max(n_row, n_column) / 2 once the grid is known
    "radius_end": 1.0,
    "kernel": "gaussian",
    "update_mode": "online",
    "seed": 42,
    "class_weighting": False,
    "minmax_scale": False,
}

# Command parameters a RunConfig file may also carry; each command picks up
# the ones its flags define.
_RUN_KEYS = (
    "data",
    "label_column",
    "head",
    "model",
    "output",
    "out_dir",
    "train_data",
    "k",
    "resolved_config",
)


class UsageError(Exception):
    """Bad flags or configuration values; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with any of the configuration keys")
    p.add_argument("--n-row", type=int)
    p.add_argument("--n-column", type=int)
    p.add_argument("--n-iter-unsupervised", type=int)
    p.add_argument("--n-iter-supervised", type=int)
    p.add_argument("--metric", choices=("euclidean", "manhattan", "tanimoto", "mahalanobis"))
    p.add_argument("--lr-schedule", choices=("inverse", "linear", "power", "exponential", "start-end"))
    p.add_argument("--lr-start", type=float)
    p.add_argument("--lr-end", type=float)
    p.add_argument("--radius-schedule", choices=("linear", "exponential", "start-end"))
    p.add_argument("--radius-start", type=float)
    p.add_argument("--radius-end", type=float)
    p.add_argument("--kernel", choices=("gaussian", "mexican-hat"))
    p.add_argument("--update-mode", choices=("online", "batch"))
    p.add_argument("--seed", type=int)
    p.add_argument("--class-weighting", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--minmax-scale", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="somkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a map and optional supervised head")
    p.add_argument("--data", help="training CSV with header row")
    p.add_argument("--label-column")
    p.add_argument("--head", choices=HEAD_KINDS)
    p.add_argument("--model", help="output model file (JSON)")
    p.add_argument("--resolved-config", help="where to write the resolved-config record")
    _add_config_flags(p)

    p = sub.add_parser("predict", help="predict with a trained model")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--label-column", help="column to exclude from the features, if present")
    p.add_argument("--output", help="predictions CSV")
    p.add_argument("--resolved-config")
    p.add_argument("--config", help="JSON file with any of the configuration keys")

    p = sub.add_parser("evaluate", help="score a trained model on labeled data")
    p.add_argument("--model")
    p.add_argument("--data", help="labeled test CSV")
    p.add_argument("--label-column")
    p.add_argument("--train-data", help="optional labeled training CSV for train metrics")
    p.add_argument("--output", help="report file; stdout when omitted")
    p.add_argument("--config", help="JSON file with any of the configuration keys")

    p = sub.add_parser("crossval", help="k-fold cross-validation")
    p.add_argument("--data")
    p.add_argument("--label-column")
    p.add_argument("--head", choices=("regression", "classification"))
    p.add_argument("--k", type=int)
    p.add_argument("--output", help="report file; stdout when omitted")
    _add_config_flags(p)

    p = sub.add_parser("export-maps", help="export BMU histogram and node output map")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--label-column", help="column to exclude from the features, if present")
    p.add_argument("--out-dir")
    p.add_argument("--resolved-config")
    p.add_argument("--config", help="JSON file with any of the configuration keys")

    return parser


def _read_config_file(args: argparse.Namespace) -> dict:
    config_path = getattr(args, "config", None)
    if not config_path:
        return {}
    path = Path(config_path)
    if not path.is_file():
        raise UsageError(f"no such config file: {path}")
    try:
        from_file = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON: {exc}")
    unknown = set(from_file) - set(_CONFIG_DEFAULTS) - set(_RUN_KEYS)
    if unknown:
        raise UsageError(f"{path}: unknown configuration keys: {sorted(unknown)}")
    return from_file


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required value(s): {flags}")


def _merge_config(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, run parameters included."""
    from_file = _read_config_file(args)

    merged = dict(_CONFIG_DEFAULTS)
    for key in merged:
        if key in from_file:
            merged[key] = from_file[key]
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["radius_start"] is None:
        merged["radius_start"] = max(merged["n_row"], merged["n_column"]) / 2.0

    # command parameters the file may supply when the flag was omitted
    for key in _RUN_KEYS:
        if hasattr(args, key) and getattr(args, key) is None and key in from_file:
            setattr(args, key, from_file[key])
    return merged


def _build_config(merged: dict) -> SomConfig:
    return SomConfig(
        n_row=merged["n_row"],
        n_column=merged["n_column"],
        n_iter_unsupervised=merged["n_iter_unsupervised"],
        n_iter_supervised=merged["n_iter_supervised"],
        metric=merged["metric"],
        lr_schedule=ScheduleSpec(
            merged["lr_schedule"],
            merged["lr_start"],
            merged["lr_end"],
            merged["n_iter_unsupervised"],
        ),
        radius_schedule=ScheduleSpec(
            merged["radius_schedule"],
            merged["radius_start"],
            merged["radius_end"],
            merged["n_iter_unsupervised"],
        ),
        kernel=merged["kernel"],
        update_mode=merged["update_mode"],
        seed=merged["seed"],
        class_weighting=merged["class_weighting"],
    )


def _validated_config(args: argparse.Namespace) -> tuple[dict, SomConfig]:
    try:
        merged = _merge_config(args)
        return merged, _build_config(merged)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resolved_record(command: str, extra: dict) -> dict:
    record = {
        "command": command,
        "seed_scheme": SEED_SCHEME,
        "seed_phases": PHASES,
    }
    record.update(extra)
    return record


def _write_resolved(record: dict, path: Path) -> None:
    path.write_text(json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _resolved_path(explicit: str | None, anchor: str | Path) -> Path:
    if explicit:
        return Path(explicit)
    return Path(anchor).with_suffix(".resolved.json")


def _resolved_line(record: dict) -> str:
    return "resolved_config: " + json.dumps(record, sort_keys=True)


def _load_for_model(path: str, label_column: str | None, head_kind: str) -> LabeledDataset:
    if head_kind == "regression":
        if not label_column:
            raise UsageError("a regression head needs --label-column")
        return load_csv(path, label_column, "continuous")
    if head_kind == "classification":
        if not label_column:
            raise UsageError("a classification head needs --label-column")
        return load_csv(path, label_column, "categorical")
    if label_column:
        # Column present in the file but unused; load it so it is not
        # mistaken for a feature.
        return load_csv(path, label_column, "categorical")
    return load_csv(path)


def _train_model(config: SomConfig, data: LabeledDataset, head_kind: str, scale: bool,
                 fold: int | None = None) -> SomModel:
    extra = () if fold is None else (fold,)
    scaling = None
    if scale:
        data, scaling = minmax_scale(data)
    grid, cov_inv = fit_unsupervised(
        data.X, config, phase_rng(config.seed, "unsupervised", *extra)
    )
    head = None
    if head_kind == "regression":
        head = fit_regressor(
            grid, data.X, data.y, config, phase_rng(config.seed, "supervised", *extra), cov_inv
        )
    elif head_kind == "classification":
        head = fit_classifier(
            grid, data.X, data.y, config, phase_rng(config.seed, "supervised", *extra), cov_inv
        )
    return SomModel(config, grid, cov_inv, scaling, head)


def _evaluate_model(model: SomModel, data: LabeledDataset, section: str) -> EvaluationReport:
    predictions = model.predict(data.X)
    if model.head_kind == "regression":
        return EvaluationReport(section, {"r_squared": r_squared(data.y, predictions)})
    cm = confusion(data.y, predictions)
    return EvaluationReport(
        section,
        {
            "overall_accuracy": overall_accuracy(cm),
            "average_accuracy": average_accuracy(cm),
            "cohens_kappa": cohens_kappa(cm),
        },
        cm=cm,
    )


def _emit_report(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_train(args: argparse.Namespace) -> int:
    merged, config = _validated_config(args)
    if args.head is None:
        args.head = "none"
    if args.head not in HEAD_KINDS:
        raise UsageError(f"head must be one of {HEAD_KINDS}, got {args.head!r}")
    _require(args, "data", "model")
    data = _load_for_model(args.data, args.label_column, args.head)
    model = _train_model(config, data, args.head, merged["minmax_scale"])
    save_model(model, args.model)
    record = _resolved_record(
        "train",
        {
            "data": args.data,
            "label_column": args.label_column,
            "head": args.head,
            "model": args.model,
            "minmax_scale": merged["minmax_scale"],
            "som_config": config_to_dict(config),
        },
    )
    _write_resolved(record, _resolved_path(args.resolved_config, args.model))
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    _merge_config(args)
    _require(args, "model", "data", "output")
    model = load_model(args.model)
    data = _load_for_model(args.data, args.label_column, "none")
    predictions = model.predict(data.X)
    out = Path(args.output)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for value in predictions:
            if model.head_kind == "regression":
                writer.writerow([repr(float(value))])
            else:
                writer.writerow([value])
    record = _resolved_record(
        "predict",
        {
            "model": args.model,
            "data": args.data,
            "label_column": args.label_column,
            "output": args.output,
            "som_config": config_to_dict(model.config),
        },
    )
    _write_resolved(record, _resolved_path(args.resolved_config, args.output))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    _merge_config(args)
    _require(args, "model", "data", "label_column")
    model = load_model(args.model)
    if model.head_kind == "none":
        raise ValueError("model has no supervised head, nothing to evaluate")
    data = _load_for_model(args.data, args.label_column, model.head_kind)
    report = EvaluationReport(f"evaluation: {model.head_kind}")
    report.folds.append(_evaluate_model(model, data, "test"))
    if args.train_data:
        train = _load_for_model(args.train_data, args.label_column, model.head_kind)
        report.folds.append(_evaluate_model(model, train, "train"))
    record = _resolved_record(
        "evaluate",
        {
            "model": args.model,
            "data": args.data,
            "train_data": args.train_data,
            "label_column": args.label_column,
            "output": args.output,
            "som_config": config_to_dict(model.config),
        },
    )
    _emit_report(report.render() + "\n" + _resolved_line(record), args.output)
    return 0


def cmd_crossval(args: argparse.Namespace) -> int:
    merged, config = _validated_config(args)
    _require(args, "data", "label_column", "head")
    if args.head not in ("regression", "classification"):
        raise UsageError(f"crossval head must be regression or classification, got {args.head!r}")
    if args.k is None:
        args.k = 5
    try:
        args.k = int(args.k)
    except (TypeError, ValueError):
        raise UsageError(f"k must be an integer, got {args.k!r}")
    if args.k < 2:
        raise UsageError(f"k must be >= 2, got {args.k}")
    data = _load_for_model(args.data, args.label_column, args.head)
    folds = k_fold(data, args.k, phase_rng(config.seed, "fold"))
    fold_reports = []
    for i, (train, test) in enumerate(folds):
        model = _train_model(config, train, args.head, merged["minmax_scale"], fold=i)
        test_metrics = _evaluate_model(model, test, "test")
        train_metrics = _evaluate_model(model, train, "train")
        fold_report = EvaluationReport(
            f"fold {i}",
            {
                **{f"{name}_test": v for name, v in test_metrics.metrics.items()},
                **{f"{name}_train": v for name, v in train_metrics.metrics.items()},
            },
            cm=test_metrics.cm,
        )
        fold_reports.append(fold_report)
    report = mean_report(f"crossval mean over {args.k} folds: {args.head}", fold_reports)
    record = _resolved_record(
        "crossval",
        {
            "data": args.data,
            "label_column": args.label_column,
            "head": args.head,
            "k": args.k,
            "output": args.output,
            "minmax_scale": merged["minmax_scale"],
            "som_config": config_to_dict(config),
        },
    )
    _emit_report(report.render() + "\n" + _resolved_line(record), args.output)
    return 0


def cmd_export_maps(args: argparse.Namespace) -> int:
    _merge_config(args)
    _require(args, "model", "data", "out_dir")
    model = load_model(args.model)
    data = _load_for_model(args.data, args.label_column, "none")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    counts = bmu_histogram(
        model.grid, model.prepare(data.X), model.config.metric, model.cov_inv
    )
    with (out_dir / "bmu_histogram.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "column", "count"])
        for r in range(counts.shape[0]):
            for c in range(counts.shape[1]):
                writer.writerow([r, c, int(counts[r, c])])

    if model.head_kind != "none":
        if model.head_kind == "regression":
            values = model.head.values
        else:
            values = model.head.classes
        with (out_dir / "output_map.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row", "column", "value"])
            for r in range(values.shape[0]):
                for c in range(values.shape[1]):
                    v = values[r, c]
                    writer.writerow([r, c, repr(float(v)) if model.head_kind == "regression" else v])
    else:
        print("model has no supervised head; skipped output_map.csv", file=sys.stderr)

    record = _resolved_record(
        "export-maps",
        {
            "model": args.model,
            "data": args.data,
            "label_column": args.label_column,
            "out_dir": args.out_dir,
            "som_config": config_to_dict(model.config),
        },
    )
    _write_resolved(record, _resolved_path(args.resolved_config, out_dir / "maps"))
    return 0


_COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "crossval": cmd_crossval,
    "export-maps": cmd_export_maps,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"somkit: error: {exc}", file=sys.stderr)
        return 1
    except (DatasetError, FileNotFoundError) as exc:
        print(f"somkit: data error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"somkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
