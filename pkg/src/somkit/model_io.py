"""Self-describing JSON model files.

One format holds an unsupervised-only map or a map plus supervised head:
format version, full config, feature dimension, row-major weights, and,
when present, the inverse covariance matrix of the mahalanobis metric, the
min-max scaling record, and the head (kind tag "regression" or
"classification", classification including its class set).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import MinMaxRecord
from .schedules import ScheduleSpec
from .som import SomConfig, WeightGrid, transform
from .supervised import (
    ClassificationHead,
    RegressionHead,
    predict_classification,
    predict_regression,
)

FORMAT_VERSION = 1


@dataclass
class SomModel:
    """A trained map plus everything prediction needs."""

    config: SomConfig
    grid: WeightGrid
    cov_inv: np.ndarray | None = None
    scaling: MinMaxRecord | None = None
    head: RegressionHead | ClassificationHead | None = None

    @property
    def head_kind(self) -> str:
        if self.head is None:
            return "none"
        return "regression" if isinstance(self.head, RegressionHead) else "classification"

    def prepare(self, X) -> np.ndarray:
        """Apply the stored feature scaling, if any."""
        X = np.asarray(X, dtype=float)
        return self.scaling.apply_to_matrix(X) if self.scaling is not None else X

    def bmus(self, X) -> np.ndarray:
        return transform(self.grid, self.prepare(X), self.config.metric, self.cov_inv)

    def predict(self, X) -> np.ndarray:
        if self.head is None:
            raise ValueError("model has no supervised head, nothing to predict")
        X = self.prepare(X)
        if isinstance(self.head, RegressionHead):
            return predict_regression(self.grid, self.head, X, self.config.metric, self.cov_inv)
        return predict_classification(self.grid, self.head, X, self.config.metric, self.cov_inv)


def schedule_to_dict(spec: ScheduleSpec) -> dict:
    return {"kind": spec.kind, "start": spec.start, "end": spec.end, "t_max": spec.t_max}


def schedule_from_dict(d: dict) -> ScheduleSpec:
    return ScheduleSpec(d["kind"], d["start"], d.get("end", 0.0), d.get("t_max", 1))


def config_to_dict(config: SomConfig) -> dict:
    return {
        "n_row": config.n_row,
        "n_column": config.n_column,
        "n_iter_unsupervised": config.n_iter_unsupervised,
        "n_iter_supervised": config.n_iter_supervised,
        "metric": config.metric,
        "lr_schedule": schedule_to_dict(config.lr_schedule),
        "radius_schedule": schedule_to_dict(config.radius_schedule),
        "kernel": config.kernel,
        "update_mode": config.update_mode,
        "seed": config.seed,
        "class_weighting": config.class_weighting,
    }


def config_from_dict(d: dict) -> SomConfig:
    return SomConfig(
        n_row=d["n_row"],
        n_column=d["n_column"],
        n_iter_unsupervised=d["n_iter_unsupervised"],
        n_iter_supervised=d["n_iter_supervised"],
        metric=d["metric"],
        lr_schedule=schedule_from_dict(d["lr_schedule"]),
        radius_schedule=schedule_from_dict(d["radius_schedule"]),
        kernel=d["kernel"],
        update_mode=d["update_mode"],
        seed=d["seed"],
        class_weighting=d["class_weighting"],
    )


def _head_to_dict(head) -> dict | None:
    if head is None:
        return None
    if isinstance(head, RegressionHead):
        return {"kind": "regression", "values": head.values.ravel().tolist()}
    return {
        "kind": "classification",
        "codes": head.codes.ravel().tolist(),
        "class_set": head.class_set.tolist(),
    }


def _head_from_dict(d: dict | None, shape: tuple[int, int]):
    if d is None:
        return None
    if d["kind"] == "regression":
        return RegressionHead(np.array(d["values"], dtype=float).reshape(shape))
    if d["kind"] == "classification":
        return ClassificationHead(
            np.array(d["codes"], dtype=int).reshape(shape), np.array(d["class_set"])
        )
    raise ValueError(f"unknown head kind {d['kind']!r} in model file")


def save_model(model: SomModel, path) -> None:
    """Write the model as JSON; floats round-trip exactly."""
    grid = model.grid
    payload = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(model.config),
        "feature_dim": grid.feature_dim,
        "weights": grid.weights.ravel().tolist(),
        "cov_inv": None if model.cov_inv is None else np.asarray(model.cov_inv).tolist(),
        "scaling": None
        if model.scaling is None
        else {
            "mins": model.scaling.mins.tolist(),
            "ranges": model.scaling.ranges.tolist(),
        },
        "head": _head_to_dict(model.head),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_model(path) -> SomModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such model file: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    config = config_from_dict(payload["config"])
    n = payload["feature_dim"]
    weights = np.array(payload["weights"], dtype=float).reshape(
        config.n_row, config.n_column, n
    )
    cov_inv = None if payload["cov_inv"] is None else np.array(payload["cov_inv"], dtype=float)
    scaling = None
    if payload["scaling"] is not None:
        scaling = MinMaxRecord(
            np.array(payload["scaling"]["mins"], dtype=float),
            np.array(payload["scaling"]["ranges"], dtype=float),
        )
    head = _head_from_dict(payload["head"], (config.n_row, config.n_column))
    return SomModel(config, WeightGrid(weights), cov_inv, scaling, head)
