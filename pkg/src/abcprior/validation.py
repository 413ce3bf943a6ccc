"""Input validation helpers shared by the public API."""

import numbers

import numpy as np

from .exceptions import ConfigError


def check_points(theta, dim=None):
    """Return ``theta`` as a finite float64 array of shape ``(k, dim)``.

    A 1-D array is read as ``k`` scalar points when ``dim`` is 1 (or None),
    and as a single point otherwise. Scalars become a single 1-D point.
    """
    arr = np.asarray(theta, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if dim is None or dim == 1:
            arr = arr.reshape(-1, 1)
        else:
            arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ConfigError(f"parameter points must be at most 2-D, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ConfigError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    if arr.shape[1] < 1:
        raise ConfigError("parameter dimension must be >= 1")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("parameter points must be finite")
    return arr


def check_data(x, name="data"):
    """Return ``x`` as a non-empty finite 1-D float64 vector."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigError(f"{name} must be a vector, got shape {arr.shape}")
    if arr.size < 1:
        raise ConfigError(f"{name} must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite")
    return arr


def check_vector(v, length=None, name="vector", positive=False, allow_zero=False):
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None:
        if arr.size == 1 and length > 1:
            arr = np.full(length, arr[0])
        if arr.size != length:
            raise ConfigError(f"{name} must have length {length}, got {arr.size}")
    if np.any(np.isnan(arr)):
        raise ConfigError(f"{name} contains NaN")
    if positive:
        bad = arr < 0 if allow_zero else arr <= 0
        if np.any(bad):
            raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'strictly positive'}")
    return arr


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(seed):
    """Accept any integer in the unsigned 64-bit range."""
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return int(seed)
