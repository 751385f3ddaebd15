import numpy as np
import pytest
from hypothesis import given, strategies as st

from somkit.distances import (
    distance_matrix,
    distances_to_many,
    estimate_inverse_covariance,
    feature_distance,
    grid_distance,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
vector_pairs = st.integers(min_value=1, max_value=12).flatmap(
    lambda n: st.tuples(
        st.lists(finite_floats, min_size=n, max_size=n),
        st.lists(finite_floats, min_size=n, max_size=n),
    )
)


class TestFeatureDistance:
    def test_euclidean_3_4_5(self):
        assert feature_distance((0, 0), (3, 4), "euclidean") == 5.0

    def test_manhattan(self):
        assert feature_distance((1, 2), (4, 6), "manhattan") == 7.0

    def test_tanimoto_hand_counts(self):
        # c_TT=1, c_FF=1, c_TF=1, c_FT=1 -> 2*(1+1) / (1+1+4) = 2/3
        d = feature_distance((1, 1, 0, 0), (1, 0, 1, 0), "tanimoto")
        assert d == pytest.approx(2 / 3, abs=1e-15)

    def test_mahalanobis_identity_is_euclidean(self):
        d = feature_distance((0, 0), (3, 4), "mahalanobis", cov_inv=np.eye(2))
        assert d == pytest.approx(5.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            feature_distance((1, 2), (1, 2, 3), "euclidean")

    def test_tanimoto_rejects_non_boolean(self):
        with pytest.raises(ValueError):
            feature_distance((0.5, 1), (1, 0), "tanimoto")

    def test_mahalanobis_needs_cov_inv(self):
        with pytest.raises(ValueError):
            feature_distance((1, 2), (3, 4), "mahalanobis")
        with pytest.raises(ValueError):
            feature_distance((1, 2), (3, 4), "mahalanobis", cov_inv=np.eye(3))

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            feature_distance((1,), (2,), "cosine")

    @given(vector_pairs)
    def test_symmetric_and_nonnegative(self, pair):
        a, b = pair
        for metric in ("euclidean", "manhattan"):
            d_ab = feature_distance(a, b, metric)
            assert d_ab >= 0
            assert d_ab == feature_distance(b, a, metric)

    @given(vector_pairs)
    def test_euclidean_below_manhattan(self, pair):
        a, b = pair
        eps = 1e-9 * (1 + feature_distance(a, b, "manhattan"))
        assert feature_distance(a, b, "euclidean") <= feature_distance(a, b, "manhattan") + eps

    def test_mahalanobis_identity_matches_euclidean_on_random(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = rng.integers(1, 10)
            a, b = rng.normal(size=(2, n))
            d_m = feature_distance(a, b, "mahalanobis", cov_inv=np.eye(n))
            assert d_m == pytest.approx(feature_distance(a, b, "euclidean"), abs=1e-12)

    @given(st.integers(min_value=1, max_value=16).flatmap(
        lambda n: st.tuples(
            st.lists(st.sampled_from([0.0, 1.0]), min_size=n, max_size=n),
            st.lists(st.sampled_from([0.0, 1.0]), min_size=n, max_size=n),
        )
    ))
    def test_tanimoto_range_and_self_distance(self, pair):
        a, b = pair
        d = feature_distance(a, b, "tanimoto")
        assert 0.0 <= d <= 1.0
        assert feature_distance(a, a, "tanimoto") == 0.0


class TestVectorizedPaths:
    def test_distances_to_many_matches_scalar(self):
        rng = np.random.default_rng(11)
        points = rng.normal(size=(20, 5))
        x = rng.normal(size=5)
        cov_inv = estimate_inverse_covariance(rng.normal(size=(40, 5)))
        for metric in ("euclidean", "manhattan", "mahalanobis"):
            bulk = distances_to_many(points, x, metric, cov_inv)
            scalar = [feature_distance(p, x, metric, cov_inv) for p in points]
            np.testing.assert_allclose(bulk, scalar, rtol=0, atol=1e-12)

    def test_distances_to_many_matches_scalar_tanimoto(self):
        rng = np.random.default_rng(12)
        points = rng.integers(0, 2, size=(20, 6)).astype(float)
        x = rng.integers(0, 2, size=6).astype(float)
        bulk = distances_to_many(points, x, "tanimoto")
        scalar = [feature_distance(p, x, "tanimoto") for p in points]
        np.testing.assert_array_equal(bulk, scalar)

    def test_distance_matrix_matches_row_loops(self):
        rng = np.random.default_rng(13)
        points = rng.normal(size=(15, 4))
        X = rng.normal(size=(9, 4))
        cov_inv = estimate_inverse_covariance(rng.normal(size=(30, 4)))
        for metric in ("euclidean", "manhattan", "mahalanobis"):
            full = distance_matrix(points, X, metric, cov_inv)
            rows = np.array([distances_to_many(points, x, metric, cov_inv) for x in X])
            np.testing.assert_allclose(full, rows, rtol=0, atol=1e-12)


class TestCovarianceEstimate:
    def test_inverse_of_known_covariance(self):
        X = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 4.0], [2.0, 4.0]])
        # sample covariance is diag(4/3, 16/3)
        inv = estimate_inverse_covariance(X, ridge=0.0)
        np.testing.assert_allclose(inv, np.diag([3 / 4, 3 / 16]), atol=1e-12)

    def test_ridge_handles_constant_feature(self):
        X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        inv = estimate_inverse_covariance(X)
        assert np.all(np.isfinite(inv))

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            estimate_inverse_covariance(np.ones((1, 3)))


class TestGridDistance:
    def test_same_node(self):
        assert grid_distance((0, 0), (0, 0)) == 0.0

    def test_3_4_5(self):
        assert grid_distance((0, 0), (3, 4)) == 5.0

    def test_same_row(self):
        assert grid_distance((2, 2), (2, 5)) == 3.0
