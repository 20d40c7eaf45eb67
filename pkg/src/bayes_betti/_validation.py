"""Input validation shared by the functional API and the estimators."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_point_cloud(X) -> np.ndarray:
    """Return ``X`` as a finite float array of shape ``(n_points, dim)``."""
    if hasattr(X, "points") and not isinstance(X, np.ndarray):
        X = X.points
    return check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1, ensure_all_finite=True)


def check_lifetimes(lifetimes) -> np.ndarray:
    """Return a 1-d float array of strictly positive, finite lifetimes."""
    arr = np.asarray(lifetimes, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"lifetimes must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("lifetimes must be finite")
    if np.any(arr <= 0):
        raise ValueError("lifetimes must be strictly positive")
    return arr


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def resolve_eps_max(policy, points: np.ndarray, margin: float = 1.05) -> float:
    """Turn an ``eps_max`` policy into a radius.

    ``"enclosing"`` gives ``margin`` times half the cloud diameter, so the
    cloud is a single component well before the filtration stops. A number
    is used as is.
    """
    if isinstance(policy, str):
        if policy != "enclosing":
            raise ValueError(f"unknown eps_max policy {policy!r}")
        from scipy.spatial.distance import pdist

        if len(points) < 2:
            return 1.0
        return float(pdist(points).max() / 2.0 * margin)
    return check_positive(policy, "eps_max")
