"""Small input-validation helpers shared by the numeric modules."""

import numpy as np

from .errors import DimensionError


def as_float_vector(value, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting non-finite values."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_float_matrix(value, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite values."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_dim(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[0] != v.shape[0]:
        raise DimensionError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
