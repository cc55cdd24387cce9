"""Real-time throughput measurement.

Two multiples of real time are reported, both "seconds of data per second
of wall time" at the configured reference rate:

* ``m_c`` (streaming mode) counts only FIR + DFT on memory-resident blocks.
* ``m_b`` (single mode) counts the whole file-to-file run: reading and
  decoding the input, computing, encoding and writing the output.

Both come from the same runs, the compute interval nested inside the
end-to-end one, so ``m_c >= m_b`` always. Timings are medians over the
repetitions after one discarded warm-up run. GB means 1e9 bytes, and
bandwidth counts bytes read plus bytes written.
"""

import csv
import dataclasses
import io
import json
import os
import statistics
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int
from .coeffgen import generate_prototype
from .dft import flops_for_dft
from .exceptions import ConfigError, PPFError
from .fir import flops_for_fir, ppf_fir_optimized, ppf_fir_reference
from .pipeline import BYTES_PER_SAMPLE, PpfConfig, encode_samples, process_stream

__all__ = [
    "BenchmarkReport",
    "realtime_multiple",
    "data_seconds",
    "build_report",
    "run_benchmark",
    "sweep",
    "reports_to_json",
    "reports_to_csv",
    "compare_fir_paths",
    "CSV_COLUMNS",
    "REPORT_NOTES",
]

REPORT_NOTES = (
    "m_c: FIR+DFT on memory-resident data; "
    "m_b: end-to-end file decode + compute + encode (stands in for accelerator transfers); "
    "bandwidth counts read+write bytes; GB = 1e9 bytes"
)

CSV_COLUMNS = (
    "n_channels",
    "n_taps",
    "workers",
    "m_b",
    "m_c",
    "gflops_per_sec",
    "bandwidth_gb_per_sec",
    "fir_flops",
    "dft_flops",
    "bytes_in",
    "bytes_out",
    "error",
)


@dataclass
class BenchmarkReport:
    n_channels: int
    n_taps: int
    workers: int
    config: dict
    total_spectra: int
    spectra_processed: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    fir_flops: int = 0
    dft_flops: int = 0
    wall_compute_sec: float = None
    wall_end_to_end_sec: float = None
    data_seconds: float = None
    m_b: float = None
    m_c: float = None
    gflops_per_sec: float = None
    bandwidth_gb_per_sec: float = None
    error: str = None

    def to_dict(self):
        return dataclasses.asdict(self)


def realtime_multiple(data_seconds, wall_seconds):
    """Seconds of data processed per second of wall time."""
    if not data_seconds > 0 or not wall_seconds > 0:
        raise ConfigError(
            f"realtime_multiple needs positive arguments, got {data_seconds}, {wall_seconds}"
        )
    return data_seconds / wall_seconds


def data_seconds(n_bytes, reference_rate_bytes_per_sec):
    """Duration of ``n_bytes`` of stream at the reference rate."""
    n_bytes = check_positive_int(n_bytes, "bytes")
    rate = check_positive_int(reference_rate_bytes_per_sec, "reference_rate_bytes_per_sec")
    return n_bytes / rate


def build_report(config, total_spectra, compute_times, end_to_end_times):
    """Assemble a report from per-run timings (seconds)."""
    if not compute_times or len(compute_times) != len(end_to_end_times):
        raise ConfigError("need matching, non-empty timing lists")
    n_channels, n_taps = config.n_channels, config.n_taps
    spectra_out = total_spectra - n_taps + 1
    if config.zero_prime:
        spectra_out = total_spectra
    if spectra_out < 1:
        raise ConfigError(f"total_spectra={total_spectra} is fewer than n_taps={n_taps}")
    spectrum_bytes = n_channels * BYTES_PER_SAMPLE
    bytes_in = total_spectra * spectrum_bytes
    bytes_out = spectra_out * spectrum_bytes
    fir_flops = flops_for_fir(n_channels, n_taps, spectra_out)
    dft_flops = flops_for_dft(n_channels, spectra_out)

    compute = statistics.median(compute_times)
    end_to_end = statistics.median(end_to_end_times)
    seconds = data_seconds(bytes_in, config.reference_rate_bytes_per_sec)
    return BenchmarkReport(
        n_channels=n_channels,
        n_taps=n_taps,
        workers=config.workers,
        config=config.to_dict(),
        total_spectra=total_spectra,
        spectra_processed=spectra_out,
        bytes_in=bytes_in,
        bytes_out=bytes_out,
        fir_flops=fir_flops,
        dft_flops=dft_flops,
        wall_compute_sec=compute,
        wall_end_to_end_sec=end_to_end,
        data_seconds=seconds,
        m_b=realtime_multiple(seconds, end_to_end),
        m_c=realtime_multiple(seconds, compute),
        gflops_per_sec=(fir_flops + dft_flops) / compute / 1e9,
        bandwidth_gb_per_sec=(bytes_in + bytes_out) / compute / 1e9,
    )


def _write_noise(path, n_spectra, n_channels, seed, chunk_spectra=4096):
    rng = np.random.default_rng(seed)
    with open(path, "wb") as fh:
        for start in range(0, n_spectra, chunk_spectra):
            rows = min(chunk_spectra, n_spectra - start)
            block = rng.standard_normal((rows, 2 * n_channels), dtype=np.float32)
            fh.write(encode_samples(block.view(np.complex64)))


def run_benchmark(
    config, total_spectra, workers=None, repeats=5, seed=0, clock=time.perf_counter, workdir=None
):
    """Time the file-to-file pipeline on seeded Gaussian noise.

    Parameters
    ----------
    config : PpfConfig
    total_spectra : int
        Input length; must be at least ``config.n_taps``.
    workers : int, optional
        Overrides ``config.workers``.
    repeats : int
        Timed runs; a warm-up run is done first and discarded.
    clock : callable
        Monotonic time source in seconds. Inject a fake to test the metric
        arithmetic.
    workdir : path, optional
        Where the temporary input and output files go.
    """
    if workers is not None:
        config = dataclasses.replace(config, workers=check_positive_int(workers, "workers"))
    total_spectra = check_positive_int(total_spectra, "total_spectra")
    repeats = check_positive_int(repeats, "repeats")
    if total_spectra < config.n_taps:
        raise ConfigError(f"total_spectra={total_spectra} is fewer than n_taps={config.n_taps}")
    coeffs = config.make_coefficients()

    compute_times = []
    end_to_end_times = []
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        src_path = os.path.join(tmp, "input.c64")
        dst_path = os.path.join(tmp, "output.c64")
        _write_noise(src_path, total_spectra, config.n_channels, seed)
        for run in range(repeats + 1):
            t0 = clock()
            with open(src_path, "rb") as src, open(dst_path, "wb") as dst:
                state = process_stream(config, src, dst, coeffs=coeffs, clock=clock)
            t1 = clock()
            if run == 0:
                continue
            compute_times.append(state.compute_seconds)
            end_to_end_times.append(t1 - t0)
    return build_report(config, total_spectra, compute_times, end_to_end_times)


def sweep(configs, total_bytes, workers=1, base_config=None, **kwargs):
    """Benchmark each ``(n_channels, n_taps)`` pair with the same input size.

    A failing configuration yields a report with ``error`` set; the sweep
    carries on with the rest. Extra keyword arguments go to
    :func:`run_benchmark`.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("sweep needs at least one configuration")
    total_bytes = check_positive_int(total_bytes, "total_bytes")
    reports = []
    for n_channels, n_taps in configs:
        total_spectra = total_bytes // (max(1, n_channels) * BYTES_PER_SAMPLE)
        try:
            if base_config is None:
                config = PpfConfig(n_channels, n_taps, workers=workers)
            else:
                config = dataclasses.replace(
                    base_config,
                    n_channels=n_channels,
                    n_taps=n_taps,
                    block_spectra=max(base_config.block_spectra, n_taps),
                    workers=workers,
                )
            reports.append(run_benchmark(config, total_spectra, **kwargs))
        except PPFError as exc:
            reports.append(
                BenchmarkReport(
                    n_channels=n_channels,
                    n_taps=n_taps,
                    workers=workers,
                    config={"n_channels": n_channels, "n_taps": n_taps},
                    total_spectra=total_spectra,
                    error=str(exc),
                )
            )
    return reports


def reports_to_json(reports):
    """One JSON object per line."""
    return "".join(json.dumps(r.to_dict()) + "\n" for r in reports)


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.to_dict()
        writer.writerow(["" if row[c] is None else row[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def compare_fir_paths(
    n_channels=1024, n_taps=16, workers=4, reference_spectra=2, optimized_spectra=512,
    seed=0, clock=time.perf_counter,
):
    """Throughput of the scalar reference FIR against the optimized one.

    The reference is timed on a short input (it is slow); throughput is
    normalized to output samples per second so the sizes need not match.
    Returns a dict with both rates and their ratio.
    """
    coeffs = generate_prototype(n_channels, n_taps)
    rng = np.random.default_rng(seed)

    def noise(n_out):
        raw = rng.standard_normal((n_out + n_taps - 1, 2 * n_channels), dtype=np.float32)
        return raw.view(np.complex64)

    x_ref = noise(reference_spectra)
    t0 = clock()
    ppf_fir_reference(x_ref, coeffs)
    ref_sec = clock() - t0

    x_opt = noise(optimized_spectra)
    ppf_fir_optimized(x_opt, coeffs, workers)  # warm-up
    t0 = clock()
    ppf_fir_optimized(x_opt, coeffs, workers)
    opt_sec = clock() - t0

    ref_rate = reference_spectra * n_channels / ref_sec
    opt_rate = optimized_spectra * n_channels / opt_sec
    return {
        "n_channels": n_channels,
        "n_taps": n_taps,
        "workers": workers,
        "reference_samples_per_sec": ref_rate,
        "optimized_samples_per_sec": opt_rate,
        "speedup": opt_rate / ref_rate,
    }
