"""Input validation helpers used by the estimator and the functional API."""

import numbers

import numpy as np

from .exceptions import ConfigError


def check_positive_int(value, name):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ConfigError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_nonnegative_real(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {value!r}") from None
    if not np.isfinite(value) or value < 0:
        raise ConfigError(f"{name} must be finite and >= 0, got {value}")
    return value


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def check_spectra(X, n_channels=None, *, name="X", dtype=np.complex64, copy=False):
    """Coerce ``X`` to a C-contiguous (n_spectra, n_channels) complex array.

    A 1-D input is read as a flat time series and folded into spectra of
    ``n_channels`` samples; its length must be a multiple of ``n_channels``.
    Non-finite samples are rejected.
    """
    arr = np.asarray(X)
    if arr.dtype.kind not in "biufc":
        raise ConfigError(f"{name} must be numeric, got dtype {arr.dtype}")
    if arr.ndim == 1:
        if n_channels is None:
            raise ConfigError(f"{name} is 1-D; n_channels is required to fold it")
        if arr.size % n_channels:
            raise ConfigError(
                f"{name} has {arr.size} samples, not a multiple of n_channels={n_channels}"
            )
        arr = arr.reshape(-1, n_channels)
    elif arr.ndim != 2:
        raise ConfigError(f"{name} must be 1-D or 2-D, got {arr.ndim}-D")
    if n_channels is not None and arr.shape[1] != n_channels:
        raise ConfigError(
            f"{name} has {arr.shape[1]} channels, expected n_channels={n_channels}"
        )
    if arr.shape[1] == 0:
        raise ConfigError(f"{name} must have at least one channel")
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if copy and np.shares_memory(arr, X):
        arr = arr.copy()
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite samples")
    return arr
