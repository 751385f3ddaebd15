"""Feature-space distance metrics for BMU search, plus grid-space distance.

All metrics are selected by string name ("euclidean", "manhattan",
"tanimoto", "mahalanobis"). Tanimoto is only defined on boolean
(0/1-valued) vectors; Mahalanobis needs an inverse covariance matrix,
typically estimated once from the training data via
:func:`estimate_inverse_covariance`.
"""

from __future__ import annotations

import numpy as np

METRICS = ("euclidean", "manhattan", "tanimoto", "mahalanobis")

DEFAULT_COV_RIDGE = 1e-8


def check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")
    return metric


def _as_boolean(v: np.ndarray, name: str) -> np.ndarray:
    if not np.all((v == 0) | (v == 1)):
        raise ValueError(f"tanimoto requires boolean (0/1) vectors, got {name}={v!r}")
    return v.astype(bool)


def _check_cov_inv(cov_inv, n: int) -> np.ndarray:
    if cov_inv is None:
        raise ValueError("mahalanobis requires an inverse covariance matrix")
    cov_inv = np.asarray(cov_inv, dtype=float)
    if cov_inv.shape != (n, n):
        raise ValueError(
            f"inverse covariance must have shape ({n}, {n}), got {cov_inv.shape}"
        )
    return cov_inv


def feature_distance(a, b, metric: str = "euclidean", cov_inv=None) -> float:
    """Distance between two feature vectors under the chosen metric.

    Args:
        a, b: 1-d arrays of equal length.
        metric: one of :data:`METRICS`.
        cov_inv: inverse covariance matrix, required for "mahalanobis".

    Returns:
        Nonnegative distance; symmetric in ``a`` and ``b``.
    """
    check_metric(metric)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"expected equal-length 1-d vectors, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise ValueError("vectors must have dimension >= 1")

    if metric == "euclidean":
        return float(np.sqrt(((a - b) ** 2).sum()))
    if metric == "manhattan":
        return float(np.abs(a - b).sum())
    if metric == "tanimoto":
        ab = _as_boolean(a, "a")
        bb = _as_boolean(b, "b")
        n_tt = int((ab & bb).sum())
        n_ff = int((~ab & ~bb).sum())
        mismatches = 2 * (int((ab & ~bb).sum()) + int((~ab & bb).sum()))
        return mismatches / (n_tt + n_ff + mismatches)
    # mahalanobis
    v_inv = _check_cov_inv(cov_inv, a.size)
    d = a - b
    q = float(d @ v_inv @ d)
    return float(np.sqrt(max(q, 0.0)))


def distances_to_many(points: np.ndarray, x, metric: str = "euclidean", cov_inv=None) -> np.ndarray:
    """Vectorized distance from one vector ``x`` to each row of ``points``.

    Mirrors :func:`feature_distance` exactly; used by the BMU scan.
    """
    check_metric(metric)
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or points.ndim != 2 or points.shape[1] != x.size:
        raise ValueError(
            f"shape mismatch: points {points.shape} vs vector {x.shape}"
        )

    if metric == "euclidean":
        return np.sqrt(((points - x) ** 2).sum(axis=1))
    if metric == "manhattan":
        return np.abs(points - x).sum(axis=1)
    if metric == "tanimoto":
        xb = _as_boolean(x, "x")
        pb = _as_boolean(points, "points")
        n_tt = (pb & xb).sum(axis=1)
        n_ff = (~pb & ~xb).sum(axis=1)
        mismatches = 2 * ((pb & ~xb).sum(axis=1) + (~pb & xb).sum(axis=1))
        return mismatches / (n_tt + n_ff + mismatches)
    v_inv = _check_cov_inv(cov_inv, x.size)
    diff = points - x
    q = np.einsum("ij,jk,ik->i", diff, v_inv, diff)
    return np.sqrt(np.maximum(q, 0.0))


def distance_matrix(points: np.ndarray, X: np.ndarray, metric: str = "euclidean", cov_inv=None) -> np.ndarray:
    """Distances between each row of ``X`` and each row of ``points``.

    Returns shape (len(X), len(points)). Same arithmetic as
    :func:`distances_to_many`, vectorized over a block of query vectors;
    callers chunk ``X`` to bound the (len(X), len(points), n) temporary.
    """
    check_metric(metric)
    points = np.asarray(points, dtype=float)
    X = np.asarray(X, dtype=float)

    if metric == "tanimoto":
        xb = _as_boolean(X, "X")[:, None, :]
        pb = _as_boolean(points, "points")[None, :, :]
        n_tt = (pb & xb).sum(axis=2)
        n_ff = (~pb & ~xb).sum(axis=2)
        mismatches = 2 * ((pb & ~xb).sum(axis=2) + (~pb & xb).sum(axis=2))
        return mismatches / (n_tt + n_ff + mismatches)

    diff = points[None, :, :] - X[:, None, :]
    if metric == "euclidean":
        return np.sqrt((diff ** 2).sum(axis=2))
    if metric == "manhattan":
        return np.abs(diff).sum(axis=2)
    v_inv = _check_cov_inv(cov_inv, points.shape[1])
    q = np.einsum("bpn,nm,bpm->bp", diff, v_inv, diff)
    return np.sqrt(np.maximum(q, 0.0))


def estimate_inverse_covariance(X, ridge: float = DEFAULT_COV_RIDGE) -> np.ndarray:
    """Inverse of the sample covariance of ``X`` with a small ridge term.

    The ridge keeps the inversion well-posed for degenerate data. Needs at
    least two rows.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected an (N, n) matrix, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError("covariance estimation needs at least 2 datapoints")
    cov = np.atleast_2d(np.cov(X, rowvar=False))
    cov = cov + ridge * np.eye(cov.shape[0])
    return np.linalg.inv(cov)


def grid_distance(c: tuple[int, int], i: tuple[int, int]) -> float:
    """Euclidean distance between two (row, column) grid positions."""
    dr = float(c[0]) - float(i[0])
    dc = float(c[1]) - float(i[1])
    return float(np.sqrt(dr * dr + dc * dc))
