"""DFT stage: per-spectrum transform of the filtered data.

Convention: forward transform with negative exponent and no scaling,

    X[k] = sum_n x[n] * exp(-2j * pi * k * n / N).

All transforms act on the last axis and treat leading axes as a batch. Only
elementwise operations and per-row reductions are used, so a row's result
does not depend on how many rows are transformed together.
"""

import functools
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._validation import check_positive_int, is_power_of_two
from .exceptions import ConfigError, UnsupportedSizeError

__all__ = ["dft_naive", "fft", "channelize_block", "flops_for_dft"]


@functools.lru_cache(maxsize=32)
def _twiddles(n):
    # exp(-2j*pi*k/n) for k in [0, n), from cos/sin of exact multiples
    angle = (-2.0 * np.pi / n) * np.arange(n)
    tw = np.cos(angle) + 1j * np.sin(angle)
    tw.flags.writeable = False
    return tw


@functools.lru_cache(maxsize=32)
def _bit_reversal(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx = idx >> 1
    rev.flags.writeable = False
    return rev


def _as_rows(x):
    x = np.asarray(x)
    if x.ndim == 0:
        raise ConfigError("transform input must be at least 1-D")
    if x.shape[-1] < 1:
        raise ConfigError("transform length must be >= 1")
    return x.astype(np.complex128, copy=False)


def dft_naive(x):
    """Direct O(N**2) DFT along the last axis.

    Twiddle factors are looked up by ``(k * n) mod N`` in a single table of
    N roots of unity, so large ``k * n`` products lose no accuracy.
    """
    x = _as_rows(x)
    n = x.shape[-1]
    tw = _twiddles(n)
    idx = np.arange(n)
    out = np.empty_like(x)
    for k in range(n):
        out[..., k] = (x * tw[(k * idx) % n]).sum(axis=-1)
    return out


def fft(x):
    """Iterative radix-2 decimation-in-time FFT along the last axis.

    Raises :class:`UnsupportedSizeError` unless the length is a power of two.
    """
    x = _as_rows(x)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise UnsupportedSizeError(f"fft length must be a power of two, got {n}")
    batch = x.shape[:-1]
    y = x[..., _bit_reversal(n)]
    tw = _twiddles(n)
    m = 2
    while m <= n:
        half = m // 2
        y = y.reshape(batch + (n // m, m))
        t = y[..., half:] * tw[: n // 2 : n // m]
        u = y[..., :half]
        y = np.concatenate((u + t, u - t), axis=-1)
        m *= 2
    return y.reshape(batch + (n,))


def _transform_rows(filtered, out, start, stop, use_fft):
    rows = filtered[start:stop]
    out[start:stop] = fft(rows) if use_fft else dft_naive(rows)


def channelize_block(filtered, fft_fallback=True, workers=1, chunk_rows=256):
    """Transform every filtered spectrum (row) to frequency channels.

    Power-of-two channel counts use :func:`fft`; anything else uses
    :func:`dft_naive` unless ``fft_fallback`` is False, in which case
    :class:`UnsupportedSizeError` is raised.

    Returns a complex64 array with the same shape as ``filtered``.
    """
    filtered = np.asarray(filtered)
    if filtered.ndim != 2:
        raise ConfigError("filtered block must be 2-D (n_spectra, n_channels)")
    n_spectra, n_channels = filtered.shape
    if n_channels < 1:
        raise ConfigError("filtered block must have at least one channel")
    workers = check_positive_int(workers, "workers")
    use_fft = is_power_of_two(n_channels)
    if not use_fft and not fft_fallback:
        raise UnsupportedSizeError(
            f"n_channels={n_channels} is not a power of two and fft fallback is disabled"
        )
    out = np.empty((n_spectra, n_channels), dtype=np.complex64)
    if n_spectra == 0:
        return out
    bounds = [(s, min(s + chunk_rows, n_spectra)) for s in range(0, n_spectra, chunk_rows)]
    if workers == 1 or len(bounds) == 1:
        for start, stop in bounds:
            _transform_rows(filtered, out, start, stop, use_fft)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: _transform_rows(filtered, out, *b, use_fft), bounds))
    return out


def flops_for_dft(n_channels, n_spectra):
    """FLOPs for the DFT stage.

    ``5 * N * log2(N)`` per spectrum for power-of-two ``N``; the direct
    transform's ``8 * N**2`` otherwise.
    """
    n_channels = check_positive_int(n_channels, "n_channels")
    if n_spectra < 0:
        raise ConfigError(f"n_spectra must be >= 0, got {n_spectra}")
    if is_power_of_two(n_channels):
        return n_spectra * 5 * n_channels * (n_channels.bit_length() - 1)
    return n_spectra * 8 * n_channels * n_channels
