"""Polyphase FIR stage.

Output spectrum ``s``, channel ``c`` is

    out[s, c] = sum_t  w[t, c] * x[s + t, c],   t = 0 .. n_taps - 1

where ``w`` is the ``(n_taps, n_channels)`` branch layout of the prototype.
Only fully-supported outputs are produced, so ``n_spectra_in`` input spectra
give ``n_spectra_in - n_taps + 1`` output spectra. Lookback across block
boundaries is the pipeline's job.

Samples and weights are single precision; accumulation is double precision
in ascending tap order in both implementations.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._validation import check_positive_int, check_spectra
from .coeffgen import FilterCoefficients
from .exceptions import ConfigError, InsufficientHistoryError

__all__ = ["ppf_fir_reference", "ppf_fir_optimized", "flops_for_fir", "branch_weights"]

# Rows per work item in the optimized path, sized so a chunk of 1024
# complex128 channels stays around 256 KiB.
_CHUNK_BYTES = 1 << 18


def branch_weights(coeffs):
    """Branch weights rounded to single precision, widened for accumulation."""
    return coeffs.branches.astype(np.float32).astype(np.float64)


def _check_inputs(X, coeffs):
    if not isinstance(coeffs, FilterCoefficients):
        raise ConfigError(f"coeffs must be FilterCoefficients, got {type(coeffs).__name__}")
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] != coeffs.n_channels:
        raise ConfigError(
            f"input has {X.shape[1]} channels but coefficients have {coeffs.n_channels}"
        )
    X = check_spectra(X, coeffs.n_channels)
    if X.shape[0] < coeffs.n_taps:
        raise InsufficientHistoryError(
            f"need at least n_taps={coeffs.n_taps} spectra, got {X.shape[0]}"
        )
    return X


def ppf_fir_reference(X, coeffs):
    """Scalar FIR: a direct transcription of the spectra/channels/taps loop nest.

    Parameters
    ----------
    X : array_like of complex, shape (n_spectra, n_channels) or flat
    coeffs : FilterCoefficients

    Returns
    -------
    ndarray of complex64, shape (n_spectra - n_taps + 1, n_channels)
    """
    X = _check_inputs(X, coeffs)
    n_spectra, n_channels = X.shape
    n_taps = coeffs.n_taps
    n_out = n_spectra - n_taps + 1

    w = branch_weights(coeffs).tolist()
    xr = X.real.astype(np.float64).tolist()
    xi = X.imag.astype(np.float64).tolist()
    out_r = [[0.0] * n_channels for _ in range(n_out)]
    out_i = [[0.0] * n_channels for _ in range(n_out)]

    for s in range(n_out):
        row_r = out_r[s]
        row_i = out_i[s]
        for c in range(n_channels):
            acc_r = 0.0
            acc_i = 0.0
            for t in range(n_taps):
                b = w[t][c]
                acc_r += b * xr[s + t][c]
                acc_i += b * xi[s + t][c]
            row_r[c] = acc_r
            row_i[c] = acc_i

    out = np.empty((n_out, n_channels), dtype=np.complex64)
    out.real = out_r
    out.imag = out_i
    return out


def _fir_rows(X, w2, out, start, stop):
    n_taps = w2.shape[0]
    # Interleaved (re, im) float64 view so a real weight scales both parts.
    x = X[start : stop + n_taps - 1].astype(np.complex128).view(np.float64)
    rows = stop - start
    acc = np.zeros((rows, x.shape[1]))
    tmp = np.empty_like(acc)
    for t in range(n_taps):
        np.multiply(w2[t], x[t : t + rows], out=tmp)
        acc += tmp
    out[start:stop] = acc.view(np.complex128)


def ppf_fir_optimized(X, coeffs, workers=1):
    """Vectorized, multithreaded FIR with the same contract as the reference.

    Work is split over output spectra. Each output element sees the same
    operations in the same order whatever the split, so the result is
    bitwise identical for any ``workers``.
    """
    workers = check_positive_int(workers, "workers")
    X = _check_inputs(X, coeffs)
    n_spectra, n_channels = X.shape
    n_out = n_spectra - coeffs.n_taps + 1
    w2 = np.repeat(branch_weights(coeffs), 2, axis=1)
    out = np.empty((n_out, n_channels), dtype=np.complex64)

    chunk = max(1, _CHUNK_BYTES // (16 * n_channels))
    bounds = [(s, min(s + chunk, n_out)) for s in range(0, n_out, chunk)]
    if workers == 1 or len(bounds) == 1:
        for start, stop in bounds:
            _fir_rows(X, w2, out, start, stop)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # list() re-raises any worker exception here
            list(pool.map(lambda b: _fir_rows(X, w2, out, *b), bounds))
    return out


def flops_for_fir(n_channels, n_taps, n_spectra_out):
    """FLOPs for the FIR stage: 4 per complex-by-real multiply-accumulate."""
    n_channels = check_positive_int(n_channels, "n_channels")
    n_taps = check_positive_int(n_taps, "n_taps")
    n_spectra_out = check_positive_int(n_spectra_out, "n_spectra_out")
    return n_spectra_out * n_channels * n_taps * 4

