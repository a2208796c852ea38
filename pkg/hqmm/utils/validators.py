"""Validation utilities for raw matrix input."""

import numpy as np


def is_finite_array(data: np.ndarray) -> bool:
    """Return True when every entry is finite."""
    return bool(np.all(np.isfinite(data)))


def is_square(m: np.ndarray) -> bool:
    """Return True for a 2-D array with equal sides."""
    return m.ndim == 2 and m.shape[0] == m.shape[1]


def has_shape(m: np.ndarray, rows: int, cols: int) -> bool:
    """Return True when ``m`` is exactly rows x cols."""
    return m.ndim == 2 and m.shape == (rows, cols)


def is_positive_int(value: object) -> bool:
    """Validate a dimension argument (bool is rejected)."""
    return isinstance(value, int | np.integer) and not isinstance(value, bool) and value > 0
