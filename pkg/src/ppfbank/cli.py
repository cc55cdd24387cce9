"""Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 write failure,
4 malformed input data.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bench import REPORT_NOTES, compare_fir_paths, reports_to_csv, reports_to_json, sweep
from .coeffgen import (
    DEFAULT_BANDWIDTH,
    DEFAULT_BETA,
    WindowSpec,
    generate_prototype,
    read_coefficients,
    write_coefficients,
)
from .exceptions import ConfigError, DecodeError, DomainError
from .pipeline import (
    BYTES_PER_SAMPLE,
    DEFAULT_BLOCK_SPECTRA,
    REFERENCE_RATE_BYTES_PER_SEC,
    PpfConfig,
    process_stream,
    write_meta,
)

logger = logging.getLogger("ppfbank")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_WRITE = 3
EXIT_DATA = 4


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


@contextlib.contextmanager
def _atomic_output(path, mode="wb"):
    """Write to a temporary file next to ``path``, renamed into place on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ppfbank-", suffix=".part")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _window(args):
    kind = args.window or "kaiser"
    beta = DEFAULT_BETA if args.beta is None else args.beta
    return WindowSpec(kind, beta)


def _bandwidth(args):
    return DEFAULT_BANDWIDTH if args.bandwidth is None else args.bandwidth


def cmd_coeff(args):
    coeffs = generate_prototype(args.channels, args.taps, _window(args), _bandwidth(args))
    try:
        with _atomic_output(args.out) as fh:
            write_coefficients(fh, coeffs, text=args.text)
    except OSError as exc:
        logger.error("cannot write %s: %s", args.out, exc)
        return EXIT_WRITE
    logger.info("wrote %d coefficients to %s", len(coeffs), args.out)
    return EXIT_OK


def _load_coeff_file(args):
    try:
        coeffs = read_coefficients(args.coeff_file, args.channels, args.taps)
    except FileNotFoundError:
        raise UsageError(f"coefficient file not found: {args.coeff_file}") from None
    if args.channels is not None and args.channels != coeffs.n_channels:
        raise UsageError(
            f"--channels {args.channels} disagrees with coefficient file ({coeffs.n_channels})"
        )
    if args.taps is not None and args.taps != coeffs.n_taps:
        raise UsageError(f"--taps {args.taps} disagrees with coefficient file ({coeffs.n_taps})")
    if any(v is not None for v in (args.beta, args.window, args.bandwidth)):
        logger.warning("--coeff-file given; ignoring inline filter design flags")
    return coeffs


def cmd_run(args):
    if args.coeff_file:
        coeffs = _load_coeff_file(args)
        window = WindowSpec("kaiser", coeffs.beta)
    else:
        if args.channels is None or args.taps is None:
            raise UsageError("run needs --channels and --taps (or --coeff-file)")
        window = _window(args)
        coeffs = generate_prototype(args.channels, args.taps, window, _bandwidth(args))
    config = PpfConfig(
        n_channels=coeffs.n_channels,
        n_taps=coeffs.n_taps,
        window=window,
        block_spectra=args.block_spectra,
        reference_rate_bytes_per_sec=args.rate_bytes,
        fft_fallback=not args.no_fft_fallback,
        workers=args.workers,
        zero_prime=args.zero_prime,
    )
    if not os.path.isfile(args.input):
        raise UsageError(f"input file not found: {args.input}")

    try:
        src = open(args.input, "rb")
    except OSError as exc:
        raise UsageError(f"cannot open {args.input}: {exc}") from None
    with src:
        try:
            with _atomic_output(args.out) as dst:
                state = process_stream(config, src, dst, coeffs=coeffs)
        except OSError as exc:
            logger.error("write failed: %s", exc)
            return EXIT_WRITE
    if args.meta is not None:
        meta_path = args.meta or args.out + ".meta"
        try:
            write_meta(meta_path, config, state)
        except OSError as exc:
            logger.error("cannot write %s: %s", meta_path, exc)
            return EXIT_WRITE
    logger.info(
        "%d spectra in, %d spectra out (%d bytes)",
        state.spectra_in, state.spectra_processed, state.bytes_out,
    )
    return EXIT_OK


def cmd_bench(args):
    configs = [(c, t) for c in args.channels for t in args.taps]
    for c, t in configs:
        if c < 1 or t < 1:
            raise UsageError(f"invalid configuration channels={c} taps={t}")
    base = PpfConfig(
        n_channels=configs[0][0],
        n_taps=configs[0][1],
        window=_window(args),
        block_spectra=max(args.block_spectra, max(t for _, t in configs)),
        reference_rate_bytes_per_sec=args.rate_bytes,
        bandwidth=_bandwidth(args),
        workers=args.workers,
        zero_prime=args.zero_prime,
    )
    if args.repeats < 1 or args.total_bytes < 1:
        raise UsageError("--repeats and --total-bytes must be positive")
    logger.info("%s", REPORT_NOTES)
    reports = sweep(
        configs, args.total_bytes, workers=args.workers, base_config=base,
        repeats=args.repeats, seed=args.seed,
    )
    text = reports_to_csv(reports) if args.format == "csv" else reports_to_json(reports)
    for r in reports:
        if r.error:
            logger.error("channels=%d taps=%d failed: %s", r.n_channels, r.n_taps, r.error)
    if args.compare_reference:
        for c, t in configs:
            result = compare_fir_paths(c, t, workers=args.workers)
            print(json.dumps(result), file=sys.stderr)
    if args.out:
        try:
            with _atomic_output(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            logger.error("cannot write %s: %s", args.out, exc)
            return EXIT_WRITE
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _channel_powers(path, n_channels, chunk_spectra=4096):
    """Yield per-spectrum power arrays of shape (rows, n_channels)."""
    spectrum_bytes = n_channels * BYTES_PER_SAMPLE
    size = os.path.getsize(path)
    if size % spectrum_bytes:
        raise DecodeError(
            f"file size {size} is not a multiple of {spectrum_bytes} bytes "
            f"({n_channels} channels)",
            size - size % spectrum_bytes,
        )
    with open(path, "rb") as fh:
        while True:
            buf = fh.read(chunk_spectra * spectrum_bytes)
            if not buf:
                break
            spectra = np.frombuffer(buf, dtype="<c8").reshape(-1, n_channels)
            yield spectra.real.astype(np.float64) ** 2 + spectra.imag.astype(np.float64) ** 2


def cmd_inspect(args):
    if not os.path.isfile(args.input):
        raise UsageError(f"input file not found: {args.input}")
    n_channels = args.channels
    total = np.zeros(n_channels)
    n_spectra = 0
    out = sys.stdout
    if args.csv:
        out.write("spectrum," + ",".join(f"ch{c}" for c in range(n_channels)) + "\n")
    for power in _channel_powers(args.input, n_channels):
        if args.csv:
            for row in power:
                out.write(f"{n_spectra}," + ",".join(f"{p:.9g}" for p in row) + "\n")
                n_spectra += 1
        else:
            n_spectra += len(power)
        total += power.sum(axis=0)
    if args.csv:
        return EXIT_OK

    mean = total / n_spectra if n_spectra else total
    top = min(args.top, n_channels)
    # stable sort keeps lower channel indices first among ties
    order = np.argsort(-mean, kind="stable")[:top]
    out.write(f"spectra: {n_spectra}  channels: {n_channels}\n")
    out.write(f"{'channel':>8}  {'mean_power':>14}\n")
    for c in range(n_channels):
        out.write(f"{c:>8d}  {mean[c]:>14.6e}\n")
    out.write(f"top {top} channels by mean power:\n")
    out.write(f"{'rank':>4}  {'channel':>8}  {'mean_power':>14}\n")
    for rank, c in enumerate(order, 1):
        out.write(f"{rank:>4d}  {c:>8d}  {mean[c]:>14.6e}\n")
    return EXIT_OK


def _add_design_flags(p):
    p.add_argument("--beta", type=float, default=None, help=f"Kaiser beta (default {DEFAULT_BETA})")
    p.add_argument("--window", choices=("kaiser", "rectangular"), default=None)
    p.add_argument(
        "--bandwidth", type=float, default=None,
        help=f"prototype passband in channel widths (default {DEFAULT_BANDWIDTH})",
    )


def _add_stream_flags(p):
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--block-spectra", type=int, default=DEFAULT_BLOCK_SPECTRA)
    p.add_argument("--rate-bytes", type=int, default=REFERENCE_RATE_BYTES_PER_SEC)
    p.add_argument("--zero-prime", action="store_true", help="pre-fill tap history with zeros")


def _configure_logging(verbose):
    # bound to the current sys.stderr on every call so repeated in-process
    # invocations (and captured streams) behave
    root = logging.getLogger("ppfbank")
    for h in list(root.handlers):
        if getattr(h, "_ppfbank_cli", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._ppfbank_cli = True
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
    root.propagate = False


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ppfbank", description="Polyphase filter bank channelizer and benchmark."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeff", parents=[common], help="write prototype filter coefficients")
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--taps", type=int, required=True)
    _add_design_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--text", action="store_true", help="one decimal value per line")
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("run", parents=[common], help="channelize a raw complex64 file")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--channels", type=int)
    p.add_argument("--taps", type=int)
    _add_design_flags(p)
    _add_stream_flags(p)
    p.add_argument("--coeff-file")
    p.add_argument("--no-fft-fallback", action="store_true")
    p.add_argument(
        "--meta", nargs="?", const="", default=None,
        help="write key=value sidecar (default OUT.meta)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", parents=[common], help="measure multiples of real time")
    p.add_argument("--channels", type=_int_list, default=[1024])
    p.add_argument("--taps", type=_int_list, default=[16])
    _add_design_flags(p)
    _add_stream_flags(p)
    p.add_argument("--total-bytes", type=int, default=64 * 1024 * 1024)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.add_argument(
        "--compare-reference", action="store_true",
        help="also time the scalar reference FIR (results on stderr)",
    )
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", parents=[common], help="summarize channelized output")
    p.add_argument("input")
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--csv", action="store_true", help="per-spectrum channel powers as CSV")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    for name in ("channels", "taps", "workers", "block_spectra", "rate_bytes", "top"):
        value = getattr(args, name, None)
        if isinstance(value, int) and value < 1:
            logger.error("--%s must be >= 1", name.replace("_", "-"))
            return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, DomainError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except DecodeError as exc:
        logger.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
