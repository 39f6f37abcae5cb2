import csv
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner

from losmimo import experiments as ex
from losmimo.channel import rayleigh_geometry, save_geometry
from losmimo.cli import ExperimentConfig, main, render_csv, run_sweeps


@pytest.fixture
def runner():
    return CliRunner()


def parse(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_render_csv_format():
    text = render_csv(["a [dB]", "b"], [[1 / 3, 2], [1e-20, True]])
    assert text == "a [dB],b\n0.333333333333,2\n1e-20,1\n"


def test_bound_sweep_cli(runner):
    res = runner.invoke(main, ["bound-sweep", "--nt", "16", "--snr-start-db", "-10", "--snr-stop-db", "10", "--snr-step-db", "5"])
    assert res.exit_code == 0, res.output
    header, rows = parse(res.output)
    assert header == ["snr_db [dB]", "rho", "bound_bits [bits/s/Hz]", "rho_tilde", "relaxed_bits [bits/s/Hz]"]
    assert [r[0] for r in rows] == [-10, -5, 0, 5, 10]
    assert all(r[4] >= r[2] * (1 - 1e-8) for r in rows)


def test_byte_identical_runs(runner, tmp_path, monkeypatch):
    args = ["eta-sweep", "--nt", "32", "--snr-start-db", "-20", "--snr-stop-db", "10", "--snr-step-db", "5", "--seed", "7", "--eta-points", "15"]
    a = runner.invoke(main, args).output
    monkeypatch.setenv("LOSMIMO_THREADS", "4")
    b = runner.invoke(main, args).output
    assert a == b and a.count("\n") == 8


def test_table1_threads_deterministic(runner, monkeypatch):
    a = runner.invoke(main, ["table1", "--nt", "32"]).output
    monkeypatch.setenv("LOSMIMO_THREADS", "3")
    assert runner.invoke(main, ["table1", "--nt", "32"]).output == a


def test_config_file_and_override(runner, tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('n_tx = 8\nsnr_start_db = 0.0\nsnr_stop_db = 2.0\nsnr_step_db = 1.0\n')
    res = runner.invoke(main, ["bound-sweep", "--config", str(cfg)])
    assert res.exit_code == 0
    _, rows = parse(res.output)
    assert [r[0] for r in rows] == [0, 1, 2]
    res = runner.invoke(main, ["bound-sweep", "--config", str(cfg), "--snr-stop-db", "4"])
    _, rows = parse(res.output)
    assert [r[0] for r in rows] == [0, 1, 2, 3, 4]
    jcfg = tmp_path / "exp.json"
    jcfg.write_text(json.dumps({"n_tx": 4, "snr_start_db": 3, "snr_stop_db": 3}))
    _, rows = parse(runner.invoke(main, ["bound-sweep", "--config", str(jcfg)]).output)
    assert rows[0][1] <= 4


@pytest.mark.parametrize("args", [
    ["bound-sweep", "--snr-start-db", "5", "--snr-stop-db", "0"],
    ["bound-sweep", "--snr-step-db", "0"],
    ["bound-sweep", "--nt", "0"],
    ["bound-sweep", "--config", "/nonexistent/cfg.toml"],
    ["plan", "--nt", "16"],
    ["plan", "--r", "1.5"],
    ["transceive", "--snr-db", "0"],
    ["three-spacing", "--nt", "1"],
])
def test_validation_failures(runner, args):
    res = runner.invoke(main, args)
    assert res.exit_code != 0


def test_output_file_and_plot_script(runner, tmp_path):
    out = tmp_path / "s.csv"
    script = tmp_path / "plot.py"
    res = runner.invoke(main, ["surrogate-scaling", "--sizes", "16,32,64", "-o", str(out), "--plot-script", str(script)])
    assert res.exit_code == 0, res.output
    header, rows = parse(out.read_text())
    assert header[0] == "n" and [r[0] for r in rows] == [16, 32, 64]
    rel = [r[3] for r in rows]
    assert rel[0] > rel[1] > rel[2]
    assert "matplotlib" in script.read_text() and str(out) in script.read_text()
    assert runner.invoke(main, ["polarization", "--nt", "16", "--plot-script", str(script)]).exit_code != 0


def test_unwritable_output_reports_path(runner, tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    res = runner.invoke(main, ["bound-sweep", "--nt", "4", "-o", str(bad)])
    assert res.exit_code != 0 and str(bad) in res.output


def test_plan_cli(runner, tmp_path):
    res = runner.invoke(main, ["plan", "--r", "0.48", "--snr-min-db", "-10", "--nt", "256", "--nr", "256"])
    assert res.exit_code == 0, res.output
    start = res.stdout.index("{")
    record = json.loads(res.stdout[start:res.stdout.rindex("}") + 1])
    assert record["count"] == 3
    np.testing.assert_allclose(record["angles_deg"], [0, 61.31, 76.68], atol=0.01)
    assert "angle [deg]" in res.output
    out = tmp_path / "rates.csv"
    res = runner.invoke(main, ["plan", "--r", "0.48", "--nt", "64", "-o", str(out), "--json-out", str(tmp_path / "p.json")])
    assert res.exit_code == 0
    assert json.loads((tmp_path / "p.json").read_text())["count"] == 1 + int(np.log(64) / np.log(1 / 0.48))
    header, _ = parse(out.read_text())
    assert "rate_bits [bits/s/Hz]" in header


@pytest.mark.parametrize("model", ["approx", "exact"])
def test_transceive_cli(runner, tmp_path, model):
    geo = tmp_path / "g.toml"
    save_geometry(rayleigh_geometry(32, elev_rx=1.2), geo)
    res = runner.invoke(main, ["transceive", "--geometry", str(geo), "--snr-db", "-5", "--model", model])
    assert res.exit_code == 0, res.output
    header, rows = parse(res.stdout)
    assert header == ["stream", "sinr_db [dB]", "rate_bits [bits/s/Hz]"]
    assert len(rows) == int(np.floor(np.cos(1.2) * 32))
    swept = runner.invoke(main, ["transceive", "--geometry", str(geo), "--snr-db", "-5", "--sweep-streams"])
    assert swept.exit_code == 0
    fixed = runner.invoke(main, ["transceive", "--geometry", str(geo), "--snr-db", "-5", "--streams", "3"])
    assert len(parse(fixed.stdout)[1]) == 3
    both = runner.invoke(main, ["transceive", "--geometry", str(geo), "--snr-db", "0", "--streams", "3", "--sweep-streams"])
    assert both.exit_code != 0


def test_three_spacing_cli(runner):
    res = runner.invoke(main, ["three-spacing", "--nt", "64", "--snr-start-db", "-40", "--snr-stop-db", "30", "--snr-step-db", "10"])
    header, rows = parse(res.output)
    assert header[-1] == "best [percent]"
    assert rows[0][-1] > 99 and rows[-1][-1] > 99


def test_eta_sweep_envelopes_three_spacing():
    snrs = ex.snr_grid_db(-30, 20, 2.5)
    _, eta_rows = ex.run_eta_sweep(256, snrs)
    _, three_rows = ex.run_three_spacing(256, snrs)
    for e, t in zip(eta_rows, three_rows):
        assert e[4] >= t[4] - 1e-9
    assert any(e[4] > t[4] + 10 for e, t in zip(eta_rows, three_rows))


def test_polarization_histogram_bimodal():
    header, rows = ex.run_polarization(512, 0.5, bins=20)
    counts = np.array([r[2] for r in rows])
    assert counts.sum() == 512
    assert counts[0] > 0.3 * 512
    mid = [c for r, c in zip(rows, counts) if 0.3 < r[0] and r[1] < 0.7]
    assert sum(mid) < 0.1 * 512


def test_table1_headers_have_units():
    header, _ = ex.run_table1(32, [0.0])
    assert any("[percent]" in h for h in header) and any("[dB]" in h for h in header)
    assert any("[bits/s/Hz]" in h for h in header)


def test_run_sweeps_matches_cli(runner):
    cfg = ExperimentConfig(command="bound-sweep", n_tx=8, snr_start_db=0, snr_stop_db=3)
    assert render_csv(*run_sweeps(cfg)) == runner.invoke(
        main, ["bound-sweep", "--nt", "8", "--snr-start-db", "0", "--snr-stop-db", "3"]
    ).output


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(command="nope")
    with pytest.raises(ValueError):
        ExperimentConfig(command="transceive", geometry="/nonexistent.toml")
    assert ExperimentConfig(command="plan", n_tx=8).n_rx == 8
