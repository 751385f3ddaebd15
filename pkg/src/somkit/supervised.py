"""Supervised head on top of a trained unsupervised map.

A second grid, aligned node-for-node with the unsupervised map, holds one
target value per node: a continuous scalar for regression or a class for
classification. The unsupervised grid stays frozen; it only selects BMUs.
Regression nodes move toward sampled labels exactly like unsupervised
weights move toward datapoints. Classification nodes flip to the sampled
label stochastically, with probability learning-rate x kernel x optional
class weight.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .schedules import learning_rate, neighborhood_radius
from .som import SomConfig, WeightGrid, kernel_matrix, transform


@dataclass
class RegressionHead:
    """Per-node continuous target values, shape (n_row, n_column)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"head values must be 2-d, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("head values must be finite")

    def copy(self) -> "RegressionHead":
        return RegressionHead(self.values.copy())


@dataclass
class ClassificationHead:
    """Per-node class assignment.

    ``codes`` holds indices into ``class_set`` (the sorted distinct training
    classes), shape (n_row, n_column).
    """

    codes: np.ndarray
    class_set: np.ndarray

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=int)
        self.class_set = np.asarray(self.class_set)
        if self.codes.ndim != 2:
            raise ValueError(f"head codes must be 2-d, got shape {self.codes.shape}")
        if self.class_set.ndim != 1 or self.class_set.size == 0:
            raise ValueError("class_set must be a nonempty 1-d array")
        if self.codes.min() < 0 or self.codes.max() >= self.class_set.size:
            raise ValueError("node class codes must index into class_set")

    @property
    def classes(self) -> np.ndarray:
        """Node classes as labels, shape (n_row, n_column)."""
        return self.class_set[self.codes]

    def copy(self) -> "ClassificationHead":
        return ClassificationHead(self.codes.copy(), self.class_set.copy())


def _check_labeled(unsup: WeightGrid, X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("supervised training needs a nonempty (N, n) data matrix")
    if y.shape != (X.shape[0],):
        raise ValueError(f"labels have shape {y.shape}, expected ({X.shape[0]},)")
    if X.shape[1] != unsup.feature_dim:
        raise ValueError(
            f"data dimension {X.shape[1]} does not match grid dimension {unsup.feature_dim}"
        )
    return X, y


def _supervised_schedules(config: SomConfig):
    t_max = max(config.n_iter_supervised, 1)
    return (
        replace(config.lr_schedule, t_max=t_max),
        replace(config.radius_schedule, t_max=t_max),
    )


def fit_regressor(
    unsup: WeightGrid, X, y, config: SomConfig, rng: np.random.Generator, cov_inv=None
) -> RegressionHead:
    """Train a regression head against the frozen unsupervised grid.

    Node values start uniform in [min(y), max(y)] and are pulled toward
    sampled labels, so with a gaussian kernel and learning-rate start <= 1
    they stay inside the training label range.
    """
    X, y = _check_labeled(unsup, X, y)
    y = y.astype(float)
    if config.lr_schedule.start > 1.0:
        raise ValueError(
            "regression head update needs a learning-rate start <= 1, "
            f"got {config.lr_schedule.start}"
        )
    lr_spec, radius_spec = _supervised_schedules(config)

    values = rng.uniform(y.min(), y.max(), size=(unsup.n_row, unsup.n_column))
    head = RegressionHead(values)

    # The unsupervised grid is fully trained, so each datapoint's BMU is
    # fixed; compute them once.
    bmus = transform(unsup, X, config.metric, cov_inv)
    shape = (unsup.n_row, unsup.n_column)
    for t in range(config.n_iter_supervised):
        j = rng.integers(X.shape[0])
        alpha = learning_rate(t, lr_spec)
        sigma = neighborhood_radius(t, radius_spec)
        h = kernel_matrix(tuple(bmus[j]), sigma, config.kernel, shape)
        head.values += alpha * h * (y[j] - head.values)
    return head


def predict_regression(
    unsup: WeightGrid, head: RegressionHead, X, metric: str = "euclidean", cov_inv=None
) -> np.ndarray:
    """Head value at each row's BMU."""
    bmus = transform(unsup, X, metric, cov_inv)
    return head.values[bmus[:, 0], bmus[:, 1]]


def encode_classes(y) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct classes and the per-sample integer codes."""
    class_set, codes = np.unique(np.asarray(y), return_inverse=True)
    return class_set, codes


def init_classifier(
    unsup: WeightGrid,
    X,
    y,
    metric: str = "euclidean",
    rng: np.random.Generator | None = None,
    cov_inv=None,
    bmus: np.ndarray | None = None,
) -> ClassificationHead:
    """Majority-vote initialization of the classification head.

    Each node takes the modal class of the datapoints mapped to it; per-node
    ties are broken by a uniform draw among the tied classes, and nodes with
    no mapped datapoints fall back to the global modal class. Precomputed
    ``bmus`` may be passed to skip the BMU scan.
    """
    X, y = _check_labeled(unsup, X, y)
    if rng is None:
        rng = np.random.default_rng()
    class_set, y_codes = encode_classes(y)
    n_classes = class_set.size

    votes = np.zeros((unsup.n_row, unsup.n_column, n_classes), dtype=int)
    if bmus is None:
        bmus = transform(unsup, X, metric, cov_inv)
    np.add.at(votes, (bmus[:, 0], bmus[:, 1], y_codes), 1)

    global_counts = np.bincount(y_codes, minlength=n_classes)
    global_mode = int(np.argmax(global_counts))

    codes = np.empty((unsup.n_row, unsup.n_column), dtype=int)
    for r in range(unsup.n_row):
        for c in range(unsup.n_column):
            node_votes = votes[r, c]
            total = node_votes.sum()
            if total == 0:
                codes[r, c] = global_mode
                continue
            top = node_votes.max()
            tied = np.flatnonzero(node_votes == top)
            codes[r, c] = tied[0] if tied.size == 1 else rng.choice(tied)
    return ClassificationHead(codes, class_set)


def class_weights(y, enabled: bool) -> dict:
    """Per-class weight N / (n_classes * N_class) when enabled, else 1."""
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("class weights need a nonempty label vector")
    class_set, codes = encode_classes(y)
    if not enabled:
        return {cls: 1.0 for cls in class_set.tolist()}
    counts = np.bincount(codes, minlength=class_set.size)
    n = y.size
    return {
        cls: n / (class_set.size * cnt)
        for cls, cnt in zip(class_set.tolist(), counts.tolist())
    }


def class_change_probability(
    bmu: tuple[int, int], t: int, w_y: float, config: SomConfig
) -> np.ndarray:
    """Per-node probability of adopting the current label.

    The raw product class-weight x learning-rate x kernel can leave [0, 1]
    (large class weights, or the mexican-hat negative lobe); it is clamped.
    """
    lr_spec, radius_spec = _supervised_schedules(config)
    alpha = learning_rate(t, lr_spec)
    sigma = neighborhood_radius(t, radius_spec)
    h = kernel_matrix(bmu, sigma, config.kernel, config.grid_shape)
    return np.clip(w_y * alpha * h, 0.0, 1.0)


def apply_class_update(
    head: ClassificationHead, P: np.ndarray, y_code: int, rng: np.random.Generator
) -> ClassificationHead:
    """Flip each node to class ``y_code`` where a uniform draw lands below P.

    Draws one uniform number per node; updates in place.
    """
    u = rng.random(head.codes.shape)
    head.codes[u < P] = y_code
    return head


def fit_classifier(
    unsup: WeightGrid, X, y, config: SomConfig, rng: np.random.Generator, cov_inv=None
) -> ClassificationHead:
    """Train a classification head against the frozen unsupervised grid."""
    X, y = _check_labeled(unsup, X, y)
    bmus = transform(unsup, X, config.metric, cov_inv)
    head = init_classifier(unsup, X, y, config.metric, rng, cov_inv, bmus=bmus)
    class_set, y_codes = encode_classes(y)

    weight_by_label = class_weights(y, config.class_weighting)
    code_weights = np.array([weight_by_label[cls] for cls in class_set.tolist()])

    for t in range(config.n_iter_supervised):
        j = rng.integers(X.shape[0])
        code = y_codes[j]
        P = class_change_probability(tuple(bmus[j]), t, code_weights[code], config)
        apply_class_update(head, P, code, rng)
    return head


def predict_classification(
    unsup: WeightGrid,
    head: ClassificationHead,
    X,
    metric: str = "euclidean",
    cov_inv=None,
) -> np.ndarray:
    """Head class at each row's BMU, as labels from the training class set."""
    bmus = transform(unsup, X, metric, cov_inv)
    return head.class_set[head.codes[bmus[:, 0], bmus[:, 1]]]
