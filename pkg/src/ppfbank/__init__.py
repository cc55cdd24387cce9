"""Streaming polyphase filter bank channelizer."""

from .bench import BenchmarkReport, data_seconds, realtime_multiple, run_benchmark, sweep
from .coeffgen import (
    DEFAULT_BANDWIDTH,
    DEFAULT_BETA,
    FilterCoefficients,
    WindowKind,
    WindowSpec,
    bessel_i0,
    generate_prototype,
    kaiser_window,
    read_coefficients,
    sinc,
    write_coefficients,
)
from .dft import channelize_block, dft_naive, fft, flops_for_dft
from .estimator import PolyphaseChannelizer
from .exceptions import (
    ConfigError,
    DecodeError,
    DegenerateFilterError,
    DomainError,
    InsufficientHistoryError,
    PPFError,
    UnsupportedSizeError,
)
from .fir import flops_for_fir, ppf_fir_optimized, ppf_fir_reference
from .pipeline import PpfConfig, StreamState, carry_history, process_stream

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "ConfigError",
    "DEFAULT_BANDWIDTH",
    "DEFAULT_BETA",
    "DecodeError",
    "DegenerateFilterError",
    "DomainError",
    "FilterCoefficients",
    "InsufficientHistoryError",
    "PPFError",
    "PolyphaseChannelizer",
    "PpfConfig",
    "StreamState",
    "UnsupportedSizeError",
    "WindowKind",
    "WindowSpec",
    "bessel_i0",
    "carry_history",
    "channelize_block",
    "data_seconds",
    "dft_naive",
    "fft",
    "flops_for_dft",
    "flops_for_fir",
    "generate_prototype",
    "kaiser_window",
    "ppf_fir_optimized",
    "ppf_fir_reference",
    "process_stream",
    "read_coefficients",
    "realtime_multiple",
    "run_benchmark",
    "sinc",
    "sweep",
    "write_coefficients",
]
