import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ppfbank import read_coefficients
from ppfbank.cli import main
from ppfbank.pipeline import read_meta

from conftest import random_spectra


def write_samples(path, x):
    path.write_bytes(np.asarray(x, dtype="<c8").tobytes())
    return str(path)


class TestCoeff:
    def test_single(self, tmp_path):
        out = tmp_path / "c.bin"
        assert main(["coeff", "--channels", "1", "--taps", "1", "--beta", "0", "--out", str(out)]) == 0
        c = read_coefficients(out)
        assert c.values.tolist() == [1.0]

    def test_round_trip_invariants(self, tmp_path):
        out = tmp_path / "c.bin"
        assert main(["coeff", "--channels", "256", "--taps", "16", "--beta", "9", "--out", str(out)]) == 0
        v = read_coefficients(out).values
        assert len(v) == 4096
        np.testing.assert_array_equal(v, v[::-1])
        # f32 storage limits the sum check
        assert abs(v.sum() - 1.0) < 1e-6

    def test_text(self, tmp_path):
        out = tmp_path / "c.txt"
        assert main(["coeff", "--channels", "4", "--taps", "2", "--out", str(out), "--text"]) == 0
        assert len(out.read_text().splitlines()) == 8

    def test_zero_channels_no_file(self, tmp_path, capsys):
        out = tmp_path / "c.bin"
        assert main(["coeff", "--channels", "0", "--taps", "4", "--out", str(out)]) == 2
        assert not out.exists()
        assert os.listdir(tmp_path) == []
        assert "channels" in capsys.readouterr().err

    def test_unwritable(self, tmp_path):
        assert main(["coeff", "--channels", "4", "--taps", "2", "--out", str(tmp_path / "no" / "c.bin")]) == 3

    def test_unknown_flag(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["coeff", "--channels", "4", "--taps", "2", "--out", "x", "--bogus"])
        assert info.value.code == 2

    def test_missing_required(self):
        with pytest.raises(SystemExit) as info:
            main(["coeff", "--channels", "4"])
        assert info.value.code == 2


class TestRun:
    def test_empty_input(self, tmp_path):
        src = write_samples(tmp_path / "in.c64", np.zeros(0))
        out = tmp_path / "out.c64"
        assert main(["run", src, "--out", str(out), "--channels", "8", "--taps", "4", "--meta"]) == 0
        assert out.read_bytes() == b""
        assert read_meta(str(out) + ".meta")["spectraProcessed"] == "0"

    def test_minimum_window(self, tmp_path, rng):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 4, 16))
        out = tmp_path / "out.c64"
        assert main(["run", src, "--out", str(out), "--channels", "16", "--taps", "4"]) == 0
        assert len(out.read_bytes()) == 16 * 8

    def test_deterministic(self, tmp_path, rng):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 300, 32))
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["run", src, "--out", str(out), "--channels", "32", "--taps", "8", "--workers", "3"]) == 0
        assert a.read_bytes() == b.read_bytes() != b""

    def test_coeff_file_equals_inline(self, tmp_path, rng):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 200, 64))
        cfile = tmp_path / "c.bin"
        assert main(["coeff", "--channels", "64", "--taps", "8", "--beta", "7.5", "--out", str(cfile)]) == 0
        inline, from_file = tmp_path / "inline", tmp_path / "file"
        assert main(["run", src, "--out", str(inline), "--channels", "64", "--taps", "8", "--beta", "7.5"]) == 0
        assert main(["run", src, "--out", str(from_file), "--coeff-file", str(cfile)]) == 0
        assert inline.read_bytes() == from_file.read_bytes()

    def test_coeff_file_wins_with_warning(self, tmp_path, rng, capsys):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 20, 8))
        cfile = tmp_path / "c.bin"
        main(["coeff", "--channels", "8", "--taps", "2", "--out", str(cfile)])
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", src, "--out", str(a), "--coeff-file", str(cfile)]) == 0
        assert main(["run", src, "--out", str(b), "--coeff-file", str(cfile), "--beta", "1"]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert "ignoring" in capsys.readouterr().err

    def test_meta_sidecar(self, tmp_path, rng):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 10, 4))
        out, meta = tmp_path / "o", tmp_path / "m.txt"
        assert main(["run", src, "--out", str(out), "--channels", "4", "--taps", "3", "--meta", str(meta)]) == 0
        m = read_meta(meta)
        assert m["spectraProcessed"] == "8" and m["bytesIn"] == "320" and m["bytesOut"] == "256"

    def test_missing_input(self, tmp_path):
        assert main(["run", str(tmp_path / "nope"), "--out", str(tmp_path / "o"), "--channels", "4", "--taps", "2"]) == 2

    def test_decode_error(self, tmp_path, rng, capsys):
        src = tmp_path / "in.c64"
        src.write_bytes(random_spectra(rng, 5, 4).tobytes() + b"\x01\x02")
        out = tmp_path / "o"
        assert main(["run", str(src), "--out", str(out), "--channels", "4", "--taps", "2"]) == 4
        assert "offset 160" in capsys.readouterr().err
        assert not out.exists()

    def test_block_smaller_than_taps(self, tmp_path, rng):
        src = write_samples(tmp_path / "in.c64", random_spectra(rng, 10, 4))
        out = tmp_path / "o"
        assert main(["run", src, "--out", str(out), "--channels", "4", "--taps", "8", "--block-spectra", "4"]) == 2
        assert not out.exists()


class TestBench:
    def test_singleton_json(self, capsys):
        args = ["bench", "--channels", "16", "--taps", "4", "--total-bytes", "20480", "--repeats", "1"]
        assert main(args) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1
        report = json.loads(lines[0])
        assert report["m_c"] >= report["m_b"] > 0

    def test_csv_sweep(self, capsys):
        args = ["bench", "--channels", "16,32,64", "--taps", "2,4", "--total-bytes", "32768",
                "--repeats", "1", "--format", "csv"]
        assert main(args) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 6
        for row in rows:
            n_c, n_t = int(row["n_channels"]), int(row["n_taps"])
            spectra_out = 32768 // (n_c * 8) - n_t + 1
            assert float(row["m_c"]) > 0
            assert int(row["fir_flops"]) == spectra_out * n_c * n_t * 4
            assert int(row["dft_flops"]) == spectra_out * 5 * n_c * (n_c.bit_length() - 1)

    def test_invalid_spec(self):
        with pytest.raises(SystemExit) as info:
            main(["bench", "--channels", "a,b"])
        assert info.value.code == 2
        assert main(["bench", "--channels", "0", "--repeats", "1"]) == 2


class TestInspect:
    def test_zero_stream(self, tmp_path, capsys):
        src = write_samples(tmp_path / "z", np.zeros(5 * 4))
        assert main(["inspect", src, "--channels", "4", "--top", "2"]) == 0
        out = capsys.readouterr().out
        assert "0.000000e+00" in out
        ranks = [l.split() for l in out.splitlines() if l.strip()[:1].isdigit() and len(l.split()) == 3]
        assert [r[1] for r in ranks] == ["0", "1"]

    def test_tone_ranks_first(self, tmp_path, capsys):
        n_channels, k = 32, 11
        n = np.arange(200 * n_channels)
        tone = np.exp(2j * np.pi * k * n / n_channels) + 0.01 * np.random.default_rng(1).standard_normal(n.size)
        src = write_samples(tmp_path / "tone", tone)
        chan = tmp_path / "chan"
        assert main(["run", src, "--out", str(chan), "--channels", "32", "--taps", "8"]) == 0
        capsys.readouterr()
        assert main(["inspect", str(chan), "--channels", "32", "--top", "3"]) == 0
        out = capsys.readouterr().out.splitlines()
        first = out[out.index(next(l for l in out if l.startswith("top"))) + 2].split()
        assert first[:2] == ["1", str(k)]

    def test_top_clamped(self, tmp_path, capsys):
        src = write_samples(tmp_path / "x", np.ones(3 * 4))
        assert main(["inspect", src, "--channels", "4", "--top", "99"]) == 0
        assert "top 4 channels" in capsys.readouterr().out

    def test_bad_length(self, tmp_path):
        src = tmp_path / "x"
        src.write_bytes(b"\x00" * (8 * 5))
        assert main(["inspect", str(src), "--channels", "4"]) == 4

    def test_csv(self, tmp_path, capsys):
        x = np.arange(8, dtype=np.complex64)
        src = write_samples(tmp_path / "x", x)
        assert main(["inspect", src, "--channels", "4", "--csv"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["spectrum", "ch0", "ch1", "ch2", "ch3"]
        assert [float(v) for v in rows[2][1:]] == [16.0, 25.0, 36.0, 49.0]


def test_console_entry_point(tmp_path):
    out = tmp_path / "c.bin"
    proc = subprocess.run(
        [sys.executable, "-m", "ppfbank.cli", "coeff", "--channels", "8", "--taps", "2", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.stat().st_size == 24 + 4 * 16
