"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInputError


def check_matrix(x, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Require a finite float matrix [n >= min_rows, features >= 1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-d, got shape {x.shape}")
    if x.shape[0] < min_rows:
        raise InvalidInputError(f"{name} needs at least {min_rows} rows, got {x.shape[0]}")
    if x.shape[1] < 1:
        raise InvalidInputError(f"{name} has no feature columns")
    if not np.isfinite(x).all():
        raise InvalidInputError(f"{name} contains non-finite values")
    return x


def check_regression_target(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != n_rows:
        raise InvalidInputError(f"y has {y.shape[0]} rows, X has {n_rows}")
    if not np.isfinite(y).all():
        raise InvalidInputError("y contains non-finite values")
    return y


def check_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y).ravel()
    if y.shape[0] != n_rows:
        raise InvalidInputError(f"y has {y.shape[0]} rows, X has {n_rows}")
    return y


def check_feature_names(names, width: int) -> list[str]:
    if names is None:
        return [f"x{j}" for j in range(width)]
    names = [str(n) for n in names]
    if len(names) != width:
        raise InvalidInputError(f"got {len(names)} feature names for {width} columns")
    if len(set(names)) != len(names):
        raise InvalidInputError("feature names must be unique")
    return names


def resolve_numeric_mask(numeric_features, width: int) -> np.ndarray:
    """Normalize a column selector to a boolean mask over encoded columns.

    ``None`` means every column is numeric; otherwise accepts a boolean mask
    or a list of column indices.
    """
    if numeric_features is None:
        return np.ones(width, dtype=bool)
    arr = np.asarray(numeric_features)
    if arr.dtype == bool:
        if arr.shape != (width,):
            raise InvalidInputError(
                f"numeric_features mask has shape {arr.shape}, expected ({width},)")
        return arr.copy()
    mask = np.zeros(width, dtype=bool)
    for idx in arr.ravel():
        i = int(idx)
        if not (0 <= i < width):
            raise InvalidInputError(f"numeric feature index {i} out of range")
        mask[i] = True
    return mask
