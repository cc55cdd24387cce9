import csv
import io
import json

import pytest

from ppfbank import ConfigError, PpfConfig, data_seconds, realtime_multiple, run_benchmark, sweep
from ppfbank.bench import (
    CSV_COLUMNS,
    BenchmarkReport,
    build_report,
    compare_fir_paths,
    reports_to_csv,
    reports_to_json,
)
from ppfbank.dft import flops_for_dft
from ppfbank.fir import flops_for_fir


class FakeClock:
    def __init__(self, step):
        self.step = step
        self.calls = 0

    def __call__(self):
        self.calls += 1
        return self.calls * self.step


@pytest.mark.parametrize("data, wall, expected", [(1.0, 0.5, 2.0), (1.0, 1.0, 1.0), (2.5, 0.4, 6.25)])
def test_realtime_multiple(data, wall, expected):
    assert realtime_multiple(data, wall) == expected


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
def test_realtime_multiple_domain(args):
    with pytest.raises(ConfigError):
        realtime_multiple(*args)


def test_data_seconds():
    assert data_seconds(6_500_000_000, 6_500_000_000) == 1.0
    assert data_seconds(3_250_000_000, 6_500_000_000) == 0.5
    assert data_seconds(1_000_000, 6_500_000_000) == pytest.approx(1.5384615384615385e-4, rel=1e-12)


def test_reference_scenario_one_second():
    # 6.5e9 bytes is a whole number of 32-channel spectra
    cfg = PpfConfig(32, 16)
    report = build_report(cfg, 6_500_000_000 // (32 * 8), [0.25] * 5, [0.5] * 5)
    assert report.bytes_in == 6_500_000_000
    assert report.data_seconds == 1.0
    assert report.m_c == 4.0 and report.m_b == 2.0


def test_reference_scenario_1024_channels():
    # nearest whole spectrum count to 6.5e9 bytes at 1024 channels
    cfg = PpfConfig(1024, 16)
    report = build_report(cfg, 793_457, [0.5] * 5, [1.0] * 5)
    assert report.data_seconds == pytest.approx(1.0, abs=2e-6)
    assert report.m_b == pytest.approx(1.0 / 1.0, rel=2e-6)
    assert report.m_c == report.data_seconds / 0.5


def test_build_report_uses_medians_and_formulas():
    cfg = PpfConfig(64, 8)
    report = build_report(cfg, 1000, [0.3, 0.1, 0.2, 9.0, 0.2], [1.0, 0.4, 0.5, 0.5, 0.6])
    assert report.wall_compute_sec == 0.2
    assert report.wall_end_to_end_sec == 0.5
    assert report.spectra_processed == 993
    assert report.fir_flops == flops_for_fir(64, 8, 993) == 993 * 64 * 8 * 4
    assert report.dft_flops == flops_for_dft(64, 993) == 993 * 5 * 64 * 6
    assert report.gflops_per_sec == pytest.approx((report.fir_flops + report.dft_flops) / 0.2 / 1e9)
    assert report.bandwidth_gb_per_sec == pytest.approx((1000 + 993) * 64 * 8 / 0.2 / 1e9)


def test_fake_clock_metric_arithmetic():
    # 16 spectra x 8 channels x 8 bytes = 1024 bytes = 1 s at 1024 B/s
    cfg = PpfConfig(8, 4, block_spectra=16, reference_rate_bytes_per_sec=1024)
    report = run_benchmark(cfg, 16, clock=FakeClock(0.2))
    assert report.data_seconds == 1.0
    # per run: start, block start, block end, finish
    assert report.wall_compute_sec == pytest.approx(0.2, rel=1e-9)
    assert report.wall_end_to_end_sec == pytest.approx(0.6, rel=1e-9)
    assert report.m_c == pytest.approx(5.0, rel=1e-9)
    assert report.m_b == pytest.approx(1 / 0.6, rel=1e-9)
    assert report.m_b == pytest.approx(report.data_seconds / report.wall_end_to_end_sec, rel=1e-9)
    assert report.m_c == pytest.approx(report.data_seconds / report.wall_compute_sec, rel=1e-9)


def test_real_run_invariants():
    report = run_benchmark(PpfConfig(64, 8, block_spectra=256), 2000)
    assert report.error is None
    assert report.m_c >= report.m_b > 0
    assert report.gflops_per_sec > 0 and report.bandwidth_gb_per_sec > 0
    assert report.bytes_in == 2000 * 64 * 8


def test_reproducible_non_timing_fields():
    a = run_benchmark(PpfConfig(16, 4), 300, repeats=1, seed=3).to_dict()
    b = run_benchmark(PpfConfig(16, 4), 300, repeats=1, seed=3).to_dict()
    timing = {"wall_compute_sec", "wall_end_to_end_sec", "m_b", "m_c", "gflops_per_sec", "bandwidth_gb_per_sec"}
    assert {k: v for k, v in a.items() if k not in timing} == {k: v for k, v in b.items() if k not in timing}


def test_too_few_spectra():
    with pytest.raises(ConfigError):
        run_benchmark(PpfConfig(16, 8), 7)


def test_singleton_sweep():
    [report] = sweep([(16, 4)], 16 * 8 * 200, repeats=1)
    assert report.n_channels == 16 and report.total_spectra == 200


def test_sweep_equal_bytes():
    reports = sweep([(64, 8), (1024, 8)], 1024 * 8 * 20, repeats=1)
    assert [r.n_channels for r in reports] == [64, 1024]
    assert reports[0].bytes_in == reports[1].bytes_in


def test_sweep_fir_flops_linear_in_taps():
    taps = [2, 4, 8, 16]
    reports = sweep([(64, t) for t in taps], 64 * 8 * 100, repeats=1, base_config=PpfConfig(64, 2, zero_prime=True))
    assert all(r.spectra_processed == 100 for r in reports)
    per_tap = {r.fir_flops // r.n_taps for r in reports}
    assert len(per_tap) == 1
    assert all(r.fir_flops == flops_for_fir(64, r.n_taps, 100) for r in reports)


def test_sweep_records_errors_and_continues():
    reports = sweep([(64, 8), (64, 64), (16, 2)], 64 * 8 * 20, repeats=1)
    assert reports[0].error is None
    assert reports[1].error and reports[1].m_c is None
    assert reports[2].error is None


def test_empty_sweep():
    with pytest.raises(ConfigError):
        sweep([], 100)


def test_json_and_csv_output():
    reports = sweep([(16, 2), (32, 4)], 32 * 8 * 50, repeats=1)
    lines = reports_to_json(reports).splitlines()
    assert len(lines) == 2
    obj = json.loads(lines[0])
    assert set(obj) == set(BenchmarkReport.__dataclass_fields__)
    rows = list(csv.DictReader(io.StringIO(reports_to_csv(reports))))
    assert len(rows) == 2
    assert tuple(rows[0]) == CSV_COLUMNS
    assert int(rows[1]["fir_flops"]) == reports[1].fir_flops


def test_compare_fir_paths_small():
    result = compare_fir_paths(16, 4, workers=2, reference_spectra=4, optimized_spectra=64)
    assert result["speedup"] > 0
