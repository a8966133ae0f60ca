"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import math
import numbers

import numpy as np

from .exceptions import ConfigurationError, RepresentationError


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_open_unit(value, name):
    """Require a real number strictly inside (0, 1)."""
    if not isinstance(value, numbers.Real) or not 0.0 < value < 1.0:
        raise ConfigurationError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_p_max(p_max, n_neighbourhoods=6):
    if not isinstance(p_max, numbers.Real) or math.isnan(p_max):
        raise ConfigurationError(f"p_max must be a real number, got {p_max!r}")
    # 1/|H| itself is allowed (it collapses to the uniform policy)
    if p_max < 1.0 / n_neighbourhoods - 1e-15 or p_max >= 1.0:
        raise ConfigurationError(
            f"p_max must lie in [1/{n_neighbourhoods}, 1), got {p_max}"
        )
    return float(p_max)


def check_time_matrix(array, shape, name, allow_zero_diagonal=False):
    """Return `array` as a C-contiguous int64 array of the given shape.

    Every entry must be a positive integer. With `allow_zero_diagonal`
    the last two axes are treated as square and their diagonal is
    ignored (setup tensors store an unused diagonal).
    """
    arr = np.asarray(array)
    if arr.shape != tuple(shape):
        raise RepresentationError(
            f"{name} has shape {arr.shape}, expected {tuple(shape)}"
        )
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise RepresentationError(f"{name} must contain integers")
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    if allow_zero_diagonal:
        n = arr.shape[-1]
        off = ~np.eye(n, dtype=bool)
        bad = arr[..., off] < 1
    else:
        bad = arr < 1
    if np.any(bad):
        raise RepresentationError(f"{name} must contain positive integers")
    return arr


def check_finite(values, name):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
