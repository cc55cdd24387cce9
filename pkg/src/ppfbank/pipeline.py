"""Streaming channelizer: raw complex samples in, channelized spectra out.

Both ends use headerless little-endian interleaved float32 ``(re, im)``
pairs, spectrum-major. Tap history is carried across block boundaries so
the output never depends on how the stream was cut into blocks.
"""

import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_positive_int
from .coeffgen import DEFAULT_BANDWIDTH, FilterCoefficients, WindowSpec, generate_prototype
from .dft import channelize_block
from .exceptions import ConfigError, DecodeError
from .fir import ppf_fir_optimized

__all__ = [
    "BYTES_PER_SAMPLE",
    "DEFAULT_BLOCK_SPECTRA",
    "REFERENCE_RATE_BYTES_PER_SEC",
    "PpfConfig",
    "StreamState",
    "carry_history",
    "process_stream",
    "decode_samples",
    "encode_samples",
    "write_meta",
    "read_meta",
]

logger = logging.getLogger(__name__)

BYTES_PER_SAMPLE = 8
DEFAULT_BLOCK_SPECTRA = 4096
# One second of a single SKA-Low station channel.
REFERENCE_RATE_BYTES_PER_SEC = 6_500_000_000

_SAMPLE_DTYPE = np.dtype("<c8")


@dataclass(frozen=True)
class PpfConfig:
    n_channels: int
    n_taps: int
    window: WindowSpec = field(default_factory=WindowSpec)
    block_spectra: int = DEFAULT_BLOCK_SPECTRA
    reference_rate_bytes_per_sec: int = REFERENCE_RATE_BYTES_PER_SEC
    fft_fallback: bool = True
    bandwidth: float = DEFAULT_BANDWIDTH
    workers: int = 1
    zero_prime: bool = False

    def __post_init__(self):
        for name in ("n_channels", "n_taps", "block_spectra", "reference_rate_bytes_per_sec", "workers"):
            check_positive_int(getattr(self, name), name)
        if not isinstance(self.window, WindowSpec):
            raise ConfigError("window must be a WindowSpec")
        if self.block_spectra < self.n_taps:
            raise ConfigError(
                f"block_spectra={self.block_spectra} must be >= n_taps={self.n_taps}"
            )

    def make_coefficients(self):
        return generate_prototype(self.n_channels, self.n_taps, self.window, self.bandwidth)

    def to_dict(self):
        d = asdict(self)
        d["window"] = {"kind": self.window.kind.value, "beta": self.window.beta}
        return d


@dataclass
class StreamState:
    """Running state of one stream.

    ``history`` holds the most recent ``n_taps - 1`` input spectra (fewer
    until that many have arrived).
    """

    n_channels: int
    n_taps: int
    history: np.ndarray = None
    spectra_in: int = 0
    spectra_processed: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    discarded_samples: int = 0
    compute_seconds: float = 0.0

    def __post_init__(self):
        if self.history is None:
            self.history = np.empty((0, self.n_channels), dtype=np.complex64)

    @classmethod
    def primed(cls, n_channels, n_taps):
        """State whose history is pre-filled with zeros."""
        return cls(
            n_channels, n_taps, history=np.zeros((n_taps - 1, n_channels), dtype=np.complex64)
        )


def carry_history(state, block):
    """Prepend the stored history to ``block`` and keep the new tail.

    Returns the FIR input ``history ++ block``. Afterwards ``state.history``
    is the last ``n_taps - 1`` spectra of that concatenation.
    """
    block = np.asarray(block)
    if block.ndim != 2 or block.shape[1] != state.n_channels:
        raise ConfigError(
            f"block must have shape (n, {state.n_channels}), got {block.shape}"
        )
    keep = state.n_taps - 1
    if keep == 0:
        return block
    joined = np.concatenate((state.history, block.astype(np.complex64, copy=False)))
    state.history = joined[max(0, len(joined) - keep) :].copy()
    return joined


def decode_samples(buf, n_channels, base_offset=0):
    """Decode raw bytes into a (n_spectra, n_channels) complex64 array.

    ``len(buf)`` must be a multiple of ``n_channels * 8``. Non-finite values
    raise :class:`DecodeError` pointing at the offending sample.
    """
    samples = np.frombuffer(buf, dtype=_SAMPLE_DTYPE)
    bad = ~np.isfinite(samples)
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise DecodeError("non-finite sample", base_offset + first * BYTES_PER_SAMPLE)
    return samples.astype(np.complex64).reshape(-1, n_channels)


def encode_samples(spectra):
    return np.ascontiguousarray(spectra, dtype=_SAMPLE_DTYPE).tobytes()


def _read_full(source, size):
    """Read up to ``size`` bytes, retrying short reads until EOF."""
    chunks = []
    remaining = size
    while remaining > 0:
        chunk = source.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def process_stream(config, source, sink, coeffs=None, clock=time.perf_counter):
    """Channelize everything readable from ``source`` into ``sink``.

    Parameters
    ----------
    config : PpfConfig
    source : binary file-like
        Read once, front to back.
    sink : binary file-like
    coeffs : FilterCoefficients, optional
        Overrides the prototype described by ``config``.
    clock : callable
        Time source for ``StreamState.compute_seconds`` (FIR + DFT only).

    Returns
    -------
    StreamState
    """
    if not isinstance(config, PpfConfig):
        raise ConfigError("config must be a PpfConfig")
    if coeffs is None:
        coeffs = config.make_coefficients()
    elif not isinstance(coeffs, FilterCoefficients):
        raise ConfigError("coeffs must be FilterCoefficients")
    if (coeffs.n_channels, coeffs.n_taps) != (config.n_channels, config.n_taps):
        raise ConfigError(
            f"coefficients are {coeffs.n_channels}x{coeffs.n_taps}, "
            f"config is {config.n_channels}x{config.n_taps}"
        )

    n_channels, n_taps = config.n_channels, config.n_taps
    if config.zero_prime:
        state = StreamState.primed(n_channels, n_taps)
    else:
        state = StreamState(n_channels, n_taps)
    spectrum_bytes = n_channels * BYTES_PER_SAMPLE
    block_bytes = config.block_spectra * spectrum_bytes
    offset = 0

    while True:
        buf = _read_full(source, block_bytes)
        if not buf:
            break
        usable = len(buf) - len(buf) % spectrum_bytes
        if usable < len(buf):
            # only the final read can come up short
            tail = len(buf) - usable
            if tail % BYTES_PER_SAMPLE:
                raise DecodeError(
                    f"stream ends inside a sample ({tail % BYTES_PER_SAMPLE} stray bytes)",
                    offset + len(buf) - tail % BYTES_PER_SAMPLE,
                )
            state.discarded_samples += tail // BYTES_PER_SAMPLE
            logger.warning(
                "discarding %d trailing samples (incomplete spectrum)", tail // BYTES_PER_SAMPLE
            )
        block = decode_samples(buf[:usable], n_channels, offset)
        offset += len(buf)
        state.bytes_in += usable
        state.spectra_in += len(block)

        t0 = clock()
        fir_input = carry_history(state, block)
        if len(fir_input) < n_taps:
            state.compute_seconds += clock() - t0
            continue
        filtered = ppf_fir_optimized(fir_input, coeffs, config.workers)
        spectra = channelize_block(filtered, config.fft_fallback, config.workers)
        state.compute_seconds += clock() - t0

        sink.write(encode_samples(spectra))
        state.spectra_processed += len(spectra)
        state.bytes_out += len(spectra) * spectrum_bytes

    return state


def write_meta(path, config, state):
    """Write the ``key=value`` sidecar describing a finished run."""
    lines = {
        "nChannels": config.n_channels,
        "nTaps": config.n_taps,
        "beta": repr(float(config.window.beta)),
        "spectraProcessed": state.spectra_processed,
        "bytesIn": state.bytes_in,
        "bytesOut": state.bytes_out,
    }
    with open(os.fspath(path), "w") as fh:
        for key, value in lines.items():
            fh.write(f"{key}={value}\n")


def read_meta(path):
    out = {}
    with open(os.fspath(path)) as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                out[key] = value
    return out
