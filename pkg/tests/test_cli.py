import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from arspi.cli import main, read_config
from arspi.indexseries import IndexSeries
from arspi.ingest import PrecipSeries, format_precip_csv
from arspi.model import PARAM_NAMES, ArspiParams
from arspi.svg import line_plot
from conftest import synthetic_precip

SVG = "{http://www.w3.org/2000/svg}"
FAST = ["--iterations", "1200", "--burn-in", "400", "--thin", "4", "--chains", "2"]


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "precip.csv"
    path.write_text(format_precip_csv(synthetic_precip(60, seed=1, dry_prob=0.1)))
    return path


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def fitted(tmp_path, data):
    out = tmp_path / "out"
    assert run("arspi", "fit", "--input", data, "--window", 3, "--out", out, *FAST) == 0
    return data, out


class TestSpi:
    def test_row_count_1188_months(self, tmp_path):
        path = tmp_path / "long.csv"
        path.write_text(format_precip_csv(synthetic_precip(1188, seed=2)))
        assert run("spi", "--input", path, "--window", 3, "--out", tmp_path) == 0
        idx = IndexSeries.from_csv((tmp_path / "spi_3.csv").read_text())
        assert len(idx) == 1186

    def test_missing_input(self, tmp_path, capsys):
        missing = tmp_path / "nope" / "missing.csv"
        assert run("spi", "--input", missing, "--out", tmp_path) == 2
        assert str(missing) in capsys.readouterr().err

    def test_bad_data_is_computation_error(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("year,month,precip\n1900,1,1.0\n1900,2,-1\n")
        assert run("spi", "--input", path, "--out", tmp_path) == 1
        assert "NegativeValue" in capsys.readouterr().err

    def test_usage_error(self):
        assert main(["spi", "--window", "x"]) == 2
        assert main(["frobnicate"]) == 2

    def test_deterministic(self, tmp_path, data):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("spi", "--input", data, "--out", a) == 0
        assert run("spi", "--input", data, "--out", b) == 0
        assert (a / "spi_3.csv").read_bytes() == (b / "spi_3.csv").read_bytes()
        assert (a / "spi_3.svg").read_bytes() == (b / "spi_3.svg").read_bytes()

    def test_svg_matches_csv(self, tmp_path, data):
        assert run("spi", "--input", data, "--out", tmp_path) == 0
        idx = IndexSeries.from_csv((tmp_path / "spi_3.csv").read_text())
        root = ET.fromstring((tmp_path / "spi_3.svg").read_text())
        (poly,) = root.iter(f"{SVG}polyline")
        pts = np.array([[float(v) for v in p.split(",")] for p in poly.get("points").split()])
        assert len(pts) == len(idx)
        # screen y decreases as the index increases; x increases with t
        assert np.all(np.diff(pts[:, 0]) > 0)
        order = np.argsort(idx.values, kind="stable")
        assert np.all(np.diff(pts[order, 1]) <= 1e-9)
        texts = [t.text for t in root.iter(f"{SVG}text")]
        assert "SPI" in texts

    def test_per_month_flag_and_config(self, tmp_path, data):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"# run settings\ninput = {data}\nwindow = 6\nper_month = yes\nout = {tmp_path / 'c'}\n")
        assert run("spi", "--config", cfg) == 0
        assert (tmp_path / "c" / "spi_6.csv").exists()
        # flags override the file
        assert run("spi", "--config", cfg, "--window", 2) == 0
        assert (tmp_path / "c" / "spi_2.csv").exists()

    def test_config_errors(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("colour = blue\n")
        assert run("spi", "--config", bad) == 2
        assert run("spi", "--config", tmp_path / "absent.cfg") == 2

    def test_read_config_types(self, tmp_path):
        cfg = tmp_path / "x.cfg"
        cfg.write_text("burn-in = 10\nthresholds = 0, -1.5\nm = 100\nseed = 3 # trailing comment\n")
        assert read_config(cfg) == {"burn_in": 10, "thresholds": (0.0, -1.5), "m": 100, "seed": 3}


class TestFit:
    def test_outputs(self, fitted):
        _, out = fitted
        summary = (out / "summary_3.txt").read_text().splitlines()
        header = summary[1].split()
        assert header[:3] == ["parameter", "mean", "sd"]
        rows = {ln.split()[0]: ln.split() for ln in summary[2:11]}
        assert list(rows) == list(PARAM_NAMES)
        assert all(len(r) == 4 for r in rows.values())
        dic_line = summary[11]
        assert dic_line.startswith("DIC 3-MTR:")
        assert math.isfinite(float(dic_line.split()[2]))
        meta = json.loads((out / "posterior_3.json").read_text())
        assert meta["chains"] == 2 and meta["seed"] == 1893
        trace = (out / "trace_3.csv").read_text().splitlines()
        assert trace[0] == "chain,iteration,param,value"
        assert len(trace) == 1 + 2 * 200 * 9

    def test_seed(self, tmp_path, fitted):
        data, out = fitted
        same = tmp_path / "same"
        other = tmp_path / "other"
        assert run("arspi", "fit", "--input", data, "--out", same, *FAST) == 0
        assert run("arspi", "fit", "--input", data, "--out", other, "--seed", 7, *FAST) == 0
        base = (out / "posterior_3.csv").read_bytes()
        assert (same / "posterior_3.csv").read_bytes() == base
        assert (other / "posterior_3.csv").read_bytes() != base


class TestIndex:
    def test_rows_sidecar_and_overlay(self, fitted):
        data, out = fitted
        assert run("arspi", "index", "--input", data, "--out", out) == 0
        idx = IndexSeries.from_csv((out / "arspi_3.csv").read_text())
        assert len(idx) == 58 - 1
        side = json.loads((out / "arspi_3.json").read_text())
        assert side["M"] == 45_000
        assert side["clamp_epsilon"] == 1 / 90_000
        assert side["seed"] == 1893
        assert len(side["posterior_sha256"]) == 64
        assert not (out / "compare_3.svg").exists()
        assert run("spi", "--input", data, "--out", out) == 0
        assert run("arspi", "index", "--input", data, "--out", out, "--m", 500) == 0
        root = ET.fromstring((out / "compare_3.svg").read_text())
        assert len(list(root.iter(f"{SVG}polyline"))) == 2

    def test_deterministic(self, tmp_path, fitted):
        data, out = fitted
        assert run("arspi", "index", "--input", data, "--out", out, "--m", 400) == 0
        first = (out / "arspi_3.csv").read_bytes()
        assert run("arspi", "index", "--input", data, "--out", out, "--m", 400) == 0
        assert (out / "arspi_3.csv").read_bytes() == first

    def test_checksum_mismatch(self, fitted, capsys):
        data, out = fitted
        post = out / "posterior_3.csv"
        post.write_text(post.read_text() + "\n")
        assert run("arspi", "index", "--input", data, "--out", out, "--m", 100) == 1
        assert "ChecksumMismatch" in capsys.readouterr().err

    def test_data_changed(self, tmp_path, fitted, capsys):
        data, out = fitted
        other = tmp_path / "other.csv"
        other.write_text(format_precip_csv(synthetic_precip(60, seed=99)))
        assert run("arspi", "index", "--input", other, "--out", out, "--m", 100) == 1
        assert "ChecksumMismatch" in capsys.readouterr().err

    def test_missing_posterior(self, tmp_path, data):
        assert run("arspi", "index", "--input", data, "--out", tmp_path) == 2


class TestAnalyze:
    def test_identical_inputs(self, tmp_path, data, capsys):
        assert run("spi", "--input", data, "--out", tmp_path) == 0
        spi = tmp_path / "spi_3.csv"
        assert run("analyze", "--out", tmp_path, "--spi", spi, "--arspi-file", spi) == 0
        assert (tmp_path / "mismatch_3.csv").read_text() == "t,year,month,spi,arspi,type\n"
        assert "type 1 0 (0.00%)" in capsys.readouterr().out
        for kind in ("spi", "arspi"):
            for tag in ("+0.00", "-1.00", "-1.50", "-2.00"):
                assert (tmp_path / f"events_{kind}_3_{tag}.csv").read_text().startswith(
                    "start_t,end_t,duration,severity,peak")
                assert (tmp_path / f"returns_{kind}_3_{tag}.csv").read_text().startswith(
                    "characteristic,level,return_years")

    def test_full_pipeline(self, fitted):
        data, out = fitted
        assert run("spi", "--input", data, "--out", out) == 0
        assert run("arspi", "index", "--input", data, "--out", out, "--m", 500) == 0
        assert run("analyze", "--out", out, "--thresholds", "0,-1") == 0
        assert (out / "events_arspi_3_-1.00.csv").exists()
        assert not (out / "events_arspi_3_-1.50.csv").exists()

    def test_missing_index(self, tmp_path):
        assert run("analyze", "--out", tmp_path) == 2


class TestSimulate:
    def _params(self, tmp_path):
        p = ArspiParams(0.3756, 0.722, 0.4411, -6.8149, 0.0026)
        path = tmp_path / "truth_in.csv"
        path.write_text(p.to_csv())
        return p, path

    def test_length_echo_determinism(self, tmp_path):
        p, path = self._params(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("simulate", "--params", path, "--length", 1188, "--seed", 5, "--out", a) == 0
        assert run("simulate", "--params", path, "--length", 1188, "--seed", 5, "--out", b) == 0
        lines = (a / "simulated.csv").read_text().splitlines()
        assert lines[0] == "year,month,precip" and len(lines) == 1189
        assert (a / "simulated.csv").read_bytes() == (b / "simulated.csv").read_bytes()
        assert ArspiParams.from_csv((a / "truth_params.csv").read_text()) == p
        assert run("simulate", "--params", path, "--length", 20, "--seed", 6, "--out", b) == 0
        assert (a / "simulated.csv").read_bytes() != (b / "simulated.csv").read_bytes()

    def test_usable_by_fit(self, tmp_path):
        _, path = self._params(tmp_path)
        assert run("simulate", "--params", path, "--length", 80, "--out", tmp_path, "--start", "1893-01") == 0
        assert run("arspi", "fit", "--input", tmp_path / "simulated.csv", "--window", 1,
                   "--out", tmp_path, *FAST) == 0

    def test_invalid_params(self, tmp_path, capsys):
        path = tmp_path / "p.csv"
        path.write_text(ArspiParams(0.1, 1.5, 0.4, 0.0, 0.0).to_csv())
        assert run("simulate", "--params", path, "--length", 10, "--out", tmp_path) == 1
        assert run("simulate", "--params", tmp_path / "none.csv", "--length", 10, "--out", tmp_path) == 2
        assert run("simulate", "--params", path, "--length", 0, "--out", tmp_path) == 2


class TestAcf:
    def test_outputs(self, tmp_path, data):
        assert run("acf", "--input", data, "--window", 3, "--max-lag", 12, "--out", tmp_path) == 0
        for name in ("acf_3.csv", "pacf_3.csv"):
            lines = (tmp_path / name).read_text().splitlines()
            assert lines[0] == "lag,coefficient,band" and len(lines) == 14


def test_module_entry_point(tmp_path, data):
    res = subprocess.run([sys.executable, "-m", "arspi", "spi", "--input", str(data), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert (tmp_path / "spi_3.csv").exists()


def test_line_plot_structure():
    doc = line_plot({"a": ([0, 1, 2], [0.0, 1.0, -1.0]), "b<c": ([0, 2], [2.0, 2.0])}, title="t & u",
                    hlines=(0,))
    root = ET.fromstring(doc)
    assert root.tag == f"{SVG}svg"
    assert len(list(root.iter(f"{SVG}polyline"))) == 2
    texts = [t.text for t in root.iter(f"{SVG}text")]
    assert "b<c" in texts and "t & u" in texts
    # a constant series still renders
    ET.fromstring(line_plot({"flat": ([1, 1], [3.0, 3.0])}))
