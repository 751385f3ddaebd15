import numpy as np
import pytest

from somkit.schedules import ScheduleSpec
from somkit.som import SomConfig, WeightGrid, fit_unsupervised, transform
from somkit.supervised import (
    apply_class_update,
    class_change_probability,
    class_weights,
    fit_classifier,
    fit_regressor,
    init_classifier,
    predict_classification,
    predict_regression,
)
from somkit.supervised import ClassificationHead, RegressionHead


def two_blob_data(seed=0, n_per=40, sep=12.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per, 2))
    b = np.array([sep, sep]) + rng.normal(size=(n_per, 2))
    X = np.vstack([a, b])
    y = np.concatenate([np.zeros(n_per), np.ones(n_per)])
    return X, y


def trained_grid(X, seed=1, **kw):
    params = dict(n_row=6, n_column=6, n_iter_unsupervised=400, n_iter_supervised=600)
    params.update(kw)
    cfg = SomConfig(**params)
    grid, cov = fit_unsupervised(X, cfg, np.random.default_rng(seed))
    return cfg, grid, cov


class TestFitRegressor:
    def test_constant_labels_converge(self):
        X, _ = two_blob_data()
        y = np.full(len(X), 3.25)
        cfg, grid, _ = trained_grid(X)
        head = fit_regressor(grid, X, y, cfg, np.random.default_rng(2))
        assert np.abs(head.values - 3.25).max() < 1e-12  # init range is degenerate

    def test_zero_iterations_equals_init(self):
        X, y = two_blob_data()
        cfg = SomConfig(n_row=4, n_column=4, n_iter_unsupervised=50, n_iter_supervised=0)
        grid, _ = fit_unsupervised(X, cfg, np.random.default_rng(1))
        head = fit_regressor(grid, X, y, cfg, np.random.default_rng(7))
        expected = np.random.default_rng(7).uniform(y.min(), y.max(), size=(4, 4))
        np.testing.assert_array_equal(head.values, expected)

    def test_separable_clusters_predict_their_labels(self):
        X, y = two_blob_data(seed=3)
        cfg, grid, _ = trained_grid(X, seed=4, n_iter_supervised=4000)
        head = fit_regressor(grid, X, y, cfg, np.random.default_rng(5))
        pred = predict_regression(grid, head, X)
        assert np.abs(pred[y == 0]).max() < 0.1
        assert np.abs(pred[y == 1] - 1.0).max() < 0.1

    def test_head_stays_in_label_range(self):
        rng = np.random.default_rng(11)
        X = rng.uniform(size=(60, 2))
        y = rng.uniform(-3, 7, size=60)
        cfg, grid, _ = trained_grid(X, seed=12)
        head = fit_regressor(grid, X, y, cfg, np.random.default_rng(13))
        assert head.values.min() >= y.min() - 1e-12
        assert head.values.max() <= y.max() + 1e-12

    def test_rejects_learning_rate_above_one(self):
        X, y = two_blob_data()
        cfg = SomConfig(
            n_row=3, n_column=3, n_iter_unsupervised=10,
            lr_schedule=ScheduleSpec("linear", 1.5, t_max=10),
        )
        grid, _ = fit_unsupervised(X, cfg, np.random.default_rng(0))
        with pytest.raises(ValueError):
            fit_regressor(grid, X, y, cfg, np.random.default_rng(0))

    def test_freezes_unsupervised_grid(self):
        X, y = two_blob_data(seed=8)
        cfg, grid, _ = trained_grid(X, seed=9)
        before = transform(grid, X)
        weights_before = grid.weights.copy()
        fit_regressor(grid, X, y, cfg, np.random.default_rng(10))
        np.testing.assert_array_equal(grid.weights, weights_before)
        np.testing.assert_array_equal(transform(grid, X), before)


class TestPredictRegression:
    def test_exact_node_hit(self):
        grid = WeightGrid(np.random.default_rng(1).normal(size=(3, 3, 2)))
        values = np.zeros((3, 3))
        values[1, 2] = 7.5
        head = RegressionHead(values)
        pred = predict_regression(grid, head, grid.weights[1, 2][None, :])
        assert pred[0] == 7.5

    def test_empty_input(self):
        grid = WeightGrid(np.zeros((2, 2, 2)))
        head = RegressionHead(np.zeros((2, 2)))
        assert predict_regression(grid, head, np.empty((0, 2))).shape == (0,)

    def test_output_length(self):
        grid = WeightGrid(np.random.default_rng(2).normal(size=(3, 3, 2)))
        head = RegressionHead(np.arange(9.0).reshape(3, 3))
        X = np.random.default_rng(3).normal(size=(17, 2))
        assert predict_regression(grid, head, X).shape == (17,)


class TestInitClassifier:
    def test_single_class(self):
        X, _ = two_blob_data()
        y = np.full(len(X), "A")
        cfg, grid, _ = trained_grid(X)
        head = init_classifier(grid, X, y, rng=np.random.default_rng(0))
        assert set(head.classes.ravel()) == {"A"}

    def test_strict_majority(self):
        grid = WeightGrid(np.array([[[0.0]], [[100.0]]]))
        X = np.array([[0.0], [0.1], [-0.1], [100.0]])
        y = np.array(["A", "A", "B", "C"])
        head = init_classifier(grid, X, y, rng=np.random.default_rng(0))
        assert head.classes[0, 0] == "A"
        assert head.classes[1, 0] == "C"

    def test_unmapped_nodes_get_global_mode(self):
        grid = WeightGrid(np.array([[[0.0]], [[1.0]], [[500.0]]]))
        X = np.array([[0.0]] * 6 + [[1.0]] * 4)
        y = np.array(["A"] * 6 + ["B"] * 4)
        head = init_classifier(grid, X, y, rng=np.random.default_rng(0))
        assert head.classes[2, 0] == "A"

    def test_tie_break_is_seeded_uniform(self):
        grid = WeightGrid(np.array([[[0.0]]]))
        X = np.array([[0.0], [0.0]])
        y = np.array(["A", "B"])
        picks = {
            str(init_classifier(grid, X, y, rng=np.random.default_rng(s)).classes[0, 0])
            for s in range(30)
        }
        assert picks == {"A", "B"}

    def test_empty_data(self):
        grid = WeightGrid(np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            init_classifier(grid, np.empty((0, 2)), np.empty(0))


class TestClassWeights:
    def test_balanced_two_classes(self):
        y = np.array(["A"] * 50 + ["B"] * 50)
        w = class_weights(y, enabled=True)
        assert w == {"A": 1.0, "B": 1.0}

    def test_imbalanced_hand_value(self):
        y = np.array(["A"] * 25 + ["B"] * 75)
        w = class_weights(y, enabled=True)
        assert w["A"] == 2.0
        assert w["B"] == pytest.approx(100 / 150)

    def test_disabled_gives_ones(self):
        y = np.array([0, 0, 1, 2, 2, 2])
        assert class_weights(y, enabled=False) == {0: 1.0, 1: 1.0, 2: 1.0}

    def test_balance_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(2, 6))
            y = rng.integers(0, k, size=int(rng.integers(k, 200)))
            y = np.concatenate([y, np.arange(k)])  # every class present
            w = class_weights(y, enabled=True)
            counts = {c: int((y == c).sum()) for c in w}
            total = sum(counts[c] * w[c] for c in w)
            assert total == pytest.approx(len(y), abs=1e-9)


class TestClassChangeProbability:
    def make_config(self, lr_start=0.5):
        return SomConfig(
            n_row=3,
            n_column=3,
            n_iter_unsupervised=10,
            n_iter_supervised=10,
            lr_schedule=ScheduleSpec("linear", lr_start, t_max=10),
            radius_schedule=ScheduleSpec("linear", 1.5, t_max=10),
        )

    def test_zero_alpha_gives_zero_grid(self):
        cfg = self.make_config()
        P = class_change_probability((1, 1), 10, 1.0, cfg)  # linear lr hits 0 at t_max
        np.testing.assert_array_equal(P, np.zeros((3, 3)))

    def test_product_at_bmu(self):
        cfg = self.make_config(lr_start=0.5)
        P = class_change_probability((1, 1), 0, 1.0, cfg)
        assert P[1, 1] == 0.5

    def test_clamped_to_one(self):
        cfg = self.make_config(lr_start=0.5)
        P = class_change_probability((1, 1), 0, 4.0, cfg)
        assert P[1, 1] == 1.0
        assert P.max() <= 1.0 and P.min() >= 0.0

    def test_mexican_hat_negative_lobe_clamped_to_zero(self):
        cfg = SomConfig(
            n_row=1,
            n_column=9,
            n_iter_unsupervised=10,
            n_iter_supervised=10,
            kernel="mexican-hat",
            lr_schedule=ScheduleSpec("linear", 1.0, t_max=10),
            radius_schedule=ScheduleSpec("linear", 2.0, t_max=10),
        )
        P = class_change_probability((0, 0), 0, 1.0, cfg)
        assert P.min() == 0.0


class TestApplyClassUpdate:
    def test_zero_probability_leaves_head(self):
        head = ClassificationHead(np.zeros((4, 4), dtype=int), np.array(["A", "B"]))
        apply_class_update(head, np.zeros((4, 4)), 1, np.random.default_rng(0))
        assert head.codes.sum() == 0

    def test_probability_one_flips_everything(self):
        head = ClassificationHead(np.zeros((4, 4), dtype=int), np.array(["A", "B"]))
        apply_class_update(head, np.ones((4, 4)), 1, np.random.default_rng(0))
        assert np.all(head.codes == 1)

    def test_half_probability_on_large_grid(self):
        head = ClassificationHead(np.zeros((100, 100), dtype=int), np.array(["A", "B"]))
        apply_class_update(head, np.full((100, 100), 0.5), 1, np.random.default_rng(1))
        frac = head.codes.mean()
        assert 0.48 <= frac <= 0.52

    def test_per_node_flip_frequency_matches_p(self):
        rng = np.random.default_rng(7)
        for p in (0.1, 0.5, 0.9):
            flips = np.zeros((5, 5))
            for _ in range(10_000):
                head = ClassificationHead(np.zeros((5, 5), dtype=int), np.array([0, 1]))
                apply_class_update(head, np.full((5, 5), p), 1, rng)
                flips += head.codes
            freq = flips / 10_000
            assert np.abs(freq - p).max() <= 0.02


class TestFitClassifier:
    def test_single_class_is_fixed_point(self):
        X, _ = two_blob_data(seed=5)
        y = np.full(len(X), "only")
        cfg, grid, _ = trained_grid(X, seed=6)
        head = fit_classifier(grid, X, y, cfg, np.random.default_rng(0))
        assert set(head.classes.ravel()) == {"only"}

    def test_deterministic(self):
        X, y = two_blob_data(seed=6)
        cfg, grid, _ = trained_grid(X, seed=7)
        h1 = fit_classifier(grid, X, y, cfg, np.random.default_rng(3))
        h2 = fit_classifier(grid, X, y, cfg, np.random.default_rng(3))
        np.testing.assert_array_equal(h1.codes, h2.codes)

    def test_separable_blobs_training_accuracy(self):
        X, y = two_blob_data(seed=9, n_per=60)
        cfg, grid, _ = trained_grid(X, seed=10)
        head = fit_classifier(grid, X, y, cfg, np.random.default_rng(11))
        pred = predict_classification(grid, head, X)
        assert (pred == y).mean() >= 0.95

    def test_classes_subset_of_training_classes(self):
        X, y = two_blob_data(seed=12)
        cfg, grid, _ = trained_grid(X, seed=13)
        head = fit_classifier(grid, X, y, cfg, np.random.default_rng(14))
        assert set(head.classes.ravel()) <= set(y)

    def test_freezes_unsupervised_grid(self):
        X, y = two_blob_data(seed=15)
        cfg, grid, _ = trained_grid(X, seed=16)
        before = transform(grid, X)
        fit_classifier(grid, X, y, cfg, np.random.default_rng(17))
        np.testing.assert_array_equal(transform(grid, X), before)

    def test_class_weighting_runs(self):
        X, y = two_blob_data(seed=18)
        y[: len(y) // 4] = 1.0  # imbalance
        cfg, grid, _ = trained_grid(X, seed=19, class_weighting=True)
        head = fit_classifier(grid, X, y, cfg, np.random.default_rng(20))
        assert set(np.unique(head.classes)) <= set(np.unique(y))


class TestPredictClassification:
    def test_exact_node_hit(self):
        grid = WeightGrid(np.random.default_rng(4).normal(size=(2, 2, 2)))
        head = ClassificationHead(np.array([[0, 1], [1, 0]]), np.array(["A", "B"]))
        pred = predict_classification(grid, head, grid.weights[0, 1][None, :])
        assert pred[0] == "B"

    def test_empty_input(self):
        grid = WeightGrid(np.zeros((2, 2, 2)))
        head = ClassificationHead(np.zeros((2, 2), dtype=int), np.array(["A"]))
        assert predict_classification(grid, head, np.empty((0, 2))).shape == (0,)

    def test_predictions_in_class_set(self):
        rng = np.random.default_rng(5)
        grid = WeightGrid(rng.normal(size=(4, 4, 3)))
        head = ClassificationHead(rng.integers(0, 3, size=(4, 4)), np.array(["x", "y", "z"]))
        pred = predict_classification(grid, head, rng.normal(size=(40, 3)))
        assert set(pred) <= {"x", "y", "z"}
