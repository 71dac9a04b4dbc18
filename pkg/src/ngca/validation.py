"""Small input-validation helpers shared across the estimators."""

from __future__ import annotations

import numpy as np


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce `X` to a 2-D float64 array and reject non-finite entries."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"`{name}` must be a 2-D array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"`{name}` contains non-finite entries")
    return arr


def as_float_vector(v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"`{name}` must be a 1-D array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"`{name}` contains non-finite entries")
    return arr


def check_min_samples(X: np.ndarray, minimum: int, name: str = "X") -> None:
    if X.shape[0] < minimum:
        raise ValueError(
            f"`{name}` needs at least {minimum} rows, got {X.shape[0]}"
        )


def as_symmetric_matrix(A, name: str = "matrix", tol: float = 1e-8) -> np.ndarray:
    """Validate that `A` is square and symmetric up to `tol`, return it symmetrized."""
    arr = as_float_matrix(A, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"`{name}` must be square, got shape {arr.shape}")
    if arr.size and np.max(np.abs(arr - arr.T)) > tol * max(1.0, np.max(np.abs(arr))):
        raise ValueError(f"`{name}` is not symmetric")
    return (arr + arr.T) / 2.0
