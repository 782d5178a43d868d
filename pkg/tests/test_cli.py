import math
from pathlib import Path

import numpy as np
import pytest

from polarq.cli import build_parser, main, read_code_file, write_code_file
from polarq.codec import PolarCode


def run(*argv):
    return main(list(argv))


class TestBoundsCommand:
    def test_bsc_golden_rows(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert run("bounds", "--channel", "bsc:0.11", "--n", "2", "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "n,L_n,U_n"
        rows = [line.split(",") for line in lines[1:]]
        assert [r[0] for r in rows] == ["0", "1", "2"]
        assert float(rows[0][1]) == pytest.approx(-0.36155902777296125, abs=1e-9)
        assert float(rows[2][2]) == pytest.approx(0.49841803498405287, abs=1e-9)

    def test_bec_constant_rows(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert run("bounds", "--channel", "bec:0.5", "--n", "6", "--out", str(out)) == 0
        for line in out.read_text().splitlines()[1:]:
            _, lo, up = line.split(",")
            assert float(lo) == pytest.approx(0.5, abs=1e-12)
            assert float(up) == pytest.approx(0.5, abs=1e-12)

    def test_triple_spec_equals_bsc(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run("bounds", "--channel", "bsc:0.11", "--n", "4", "--out", str(a)) == 0
        assert run("bounds", "--channel", "triple:0.89,0,0.11", "--n", "4", "--out", str(b)) == 0
        assert a.read_text() == b.read_text()

    def test_parse_error_no_output(self, tmp_path, capsys):
        out = tmp_path / "bounds.csv"
        assert run("bounds", "--channel", "bsc:0.8", "--n", "4", "--out", str(out)) == 2
        assert not out.exists()
        assert "error" in capsys.readouterr().err

    def test_ceiling_error(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert run("bounds", "--channel", "bsc:0.11", "--n", "30", "--out", str(out)) == 2
        assert not out.exists()

    def test_tol_truncates_series(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert run("bounds", "--channel", "bec:0.5", "--n", "10", "--tol", "1e-6",
                   "--out", str(out)) == 0
        assert len(out.read_text().splitlines()) == 2  # header + level 0


class TestCurveCommand:
    def test_bec_identity(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run("curve", "--family", "bec", "--points", "5", "--n", "6",
                   "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "capacity,lower,upper,n"
        for line in lines[1:]:
            cap, lo, up, n = line.split(",")
            assert float(lo) == pytest.approx(float(cap), abs=1e-11)
            assert float(up) == pytest.approx(float(cap), abs=1e-11)
            assert n == "6"


class TestConstructCommand:
    def test_bec_half_rate_n1(self, tmp_path):
        out = tmp_path / "code.txt"
        assert run("construct", "--channel", "bec:0.5", "--quantizer", "q:sign",
                   "--n", "1", "--rate", "0.5", "--out", str(out)) == 0
        code, meta = read_code_file(str(out))
        assert sorted(code.info_set) == [1]
        assert meta == {"n": "1", "k": "1", "channel": "bec:0.5", "quantizer": "q:sign"}

    def test_rate_extremes(self, tmp_path):
        out = tmp_path / "code.txt"
        assert run("construct", "--channel", "bec:0.5", "--quantizer", "q:sign",
                   "--n", "3", "--rate", "1", "--out", str(out)) == 0
        code, _ = read_code_file(str(out))
        assert sorted(code.info_set) == list(range(8))
        assert run("construct", "--channel", "bec:0.5", "--quantizer", "q:sign",
                   "--n", "3", "--rate", "0", "--out", str(out)) == 0
        code, _ = read_code_file(str(out))
        assert sorted(code.info_set) == []

    def test_quantized_construction(self, tmp_path):
        out = tmp_path / "code.txt"
        assert run("construct", "--channel", "bsc:0.11", "--quantizer",
                   "q:delta=1,M=8", "--n", "4", "--rate", "0.25",
                   "--out", str(out)) == 0
        code, _ = read_code_file(str(out))
        assert len(code.info_set) == 4

    def test_non_integral_rate(self, tmp_path):
        out = tmp_path / "code.txt"
        assert run("construct", "--channel", "bec:0.5", "--quantizer", "q:sign",
                   "--n", "2", "--rate", "0.3", "--out", str(out)) == 2
        assert not out.exists()


class TestSimulateCommand:
    def _construct(self, tmp_path, channel="bec:0.5", n=4, rate=0.5):
        code = tmp_path / "code.txt"
        assert run("construct", "--channel", channel, "--quantizer", "q:sign",
                   "--n", str(n), "--rate", str(rate), "--out", str(code)) == 0
        return code

    def test_noiseless(self, tmp_path):
        code = self._construct(tmp_path)
        out = tmp_path / "sim.csv"
        assert run("simulate", "--code", str(code), "--channel", "bec:0",
                   "--decoder", "erasure", "--trials", "100", "--seed", "0",
                   "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "decoder,channel,n,rate,trials,seed,block_errors,bler,ci95"
        fields = lines[1].split(",")
        assert fields[0] == "erasure" and fields[6] == "0" and fields[7] == "0"

    def test_same_seed_identical_rows_and_append(self, tmp_path):
        code = self._construct(tmp_path)
        out = tmp_path / "sim.csv"
        for _ in range(2):
            assert run("simulate", "--code", str(code), "--channel", "bec:0.5",
                       "--decoder", "erasure", "--trials", "400", "--seed", "7",
                       "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1] == lines[2]

    def test_erasure_equals_exact_on_bec(self, tmp_path):
        code = self._construct(tmp_path, n=5)
        rows = []
        for decoder in ("erasure", "exact"):
            out = tmp_path / f"{decoder}.csv"
            assert run("simulate", "--code", str(code), "--channel", "bec:0.5",
                       "--decoder", decoder, "--trials", "500", "--seed", "21",
                       "--out", str(out)) == 0
            rows.append(out.read_text().splitlines()[1].split(","))
        assert rows[0][6] == rows[1][6]  # identical block error counts

    def test_threads_flag_does_not_change_output(self, tmp_path):
        code = self._construct(tmp_path, channel="bsc:0.11", n=6)
        texts = []
        for threads, name in ((1, "a.csv"), (3, "b.csv")):
            out = tmp_path / name
            assert run("simulate", "--code", str(code), "--channel", "bsc:0.11",
                       "--decoder", "quantized", "--quantizer", "q:delta=0.5,M=6",
                       "--trials", "9000", "--seed", "2", "--threads", str(threads),
                       "--out", str(out)) == 0
            texts.append(out.read_text())
        assert texts[0] == texts[1]

    def test_quantized_requires_quantizer(self, tmp_path):
        code = self._construct(tmp_path)
        out = tmp_path / "sim.csv"
        assert run("simulate", "--code", str(code), "--channel", "bec:0.5",
                   "--decoder", "quantized", "--trials", "10", "--seed", "0",
                   "--out", str(out)) == 2
        assert not out.exists()


class TestSweepCommand:
    def test_bec_three_levels_match_exact_decoder(self, tmp_path):
        # the three-level decoder is exact on the erasure channel, so its
        # achievable rate equals the one from the classical erasure
        # recursion computed here as an oracle
        out = tmp_path / "sweep.csv"
        assert run("sweep-q", "--channel", "bec:0.5", "--q-sizes", "3",
                   "--n", "8", "--target-sum", "1e-2", "--out", str(out)) == 0
        row = out.read_text().splitlines()[1].split(",")
        k_cli = int(row[6])

        z = np.array([0.5])
        for _ in range(8):
            z = np.concatenate([1 - (1 - z) ** 2, z ** 2])
        perr = np.sort(z / 2)
        k_oracle = int(np.searchsorted(np.cumsum(perr), 1e-2, side="right"))
        assert k_cli == k_oracle

    def test_header_records_rule(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run("sweep-q", "--channel", "bsc:0.11", "--q-sizes", "3,5",
                   "--n", "6", "--target-sum", "1e-2", "--m-sat", "8",
                   "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "q,log2_q,delta,m_sat,n,target_sum,k,rate,capacity_gap"
        assert lines[1].split(",")[2] == "sign"
        assert lines[2].split(",")[2] == "4"

    def test_even_size_rejected(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run("sweep-q", "--channel", "bsc:0.11", "--q-sizes", "4",
                   "--n", "4", "--target-sum", "1e-2", "--out", str(out)) == 2
        assert not out.exists()


class TestCodeFileRoundTrip:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "code.txt"
        code = PolarCode(n=3, info_set=frozenset({1, 5, 7}))
        write_code_file(str(path), code, "bsc:0.11", "q:sign")
        loaded, meta = read_code_file(str(path))
        assert loaded == code
        assert meta["channel"] == "bsc:0.11"

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\n")
        with pytest.raises(ValueError):
            read_code_file(str(path))


def test_parser_requires_command(capsys):
    assert main([]) != 0
