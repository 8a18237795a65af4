import json
import math

import numpy as np
import pytest

from laserclock.cli import main


def read(path):
    return path.read_bytes()


def rows_of(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_limits_values(tmp_path, capsys):
    out = tmp_path / "limits.csv"
    assert main(["limits", "--mu", "1e6", "--parties", "16", "--out", str(out)]) == 0
    row = rows_of(out)[0]
    assert float(row["hl_mse_rad2"]) == pytest.approx(1e-6)
    assert float(row["sql_mse_rad2"]) == pytest.approx(2e-6)
    for col in ("seed", "dt", "trials"):
        assert col in row


def test_limits_prints_table_without_out(capsys):
    assert main(["limits", "--mu", "1e6", "--parties", "16"]) == 0
    text = capsys.readouterr().out
    assert "hl_mse_rad2" in text
    assert "1e-06" in text


def test_track_determinism(tmp_path):
    args = ["track", "--mode", "adaptive", "--flux", "1e4", "--linewidth", "1",
            "--dt", "auto", "--trials", "200", "--seed", "7"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert read(out1) == read(out2)


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_track_worker_count_invariance(tmp_path):
    base = ["track", "--mode", "adaptive", "--flux", "1e3", "--linewidth", "1",
            "--trials", "64", "--seed", "3"]
    out1, out2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    assert main(base + ["--workers", "1", "--out", str(out1)]) == 0
    assert main(base + ["--workers", "2", "--out", str(out2)]) == 0
    assert read(out1) == read(out2)


def test_sidecar_rerun_reproduces_output(tmp_path):
    out1 = tmp_path / "run.csv"
    assert main(["track", "--mode", "heterodyne", "--flux", "1e3", "--linewidth", "1",
                 "--trials", "100", "--seed", "11", "--out", str(out1)]) == 0
    sidecar = tmp_path / "run.json"
    meta = json.loads(sidecar.read_text())
    assert meta["subcommand"] == "track"
    assert meta["version"]
    out2 = tmp_path / "rerun.csv"
    assert main(["track", "--config", str(sidecar), "--out", str(out2)]) == 0
    assert read(out1) == read(out2)


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": 100.0, "parties": "4"}))
    out = tmp_path / "o.csv"
    assert main(["limits", "--config", str(cfg), "--mu", "400", "--out", str(out)]) == 0
    row = rows_of(out)[0]
    assert float(row["mu_photons"]) == 400.0
    assert row["parties"] == "4"


def test_sync_sweep_exponent_column(tmp_path):
    out = tmp_path / "sync.csv"
    assert main(["sync", "--kappa", "1", "--mu", "100", "--parties", "1,4,16",
                 "--regime", "hl", "--trials", "100", "--seed", "7",
                 "--out", str(out)]) == 0
    rows = rows_of(out)
    assert [r["parties"] for r in rows] == ["1", "4", "16"]
    exps = {r["scaling_exponent"] for r in rows}
    assert len(exps) == 1
    assert 0.45 <= float(exps.pop()) <= 0.55
    for r in rows:
        assert float(r["mean_mse_rad2"]) == pytest.approx(float(r["predicted_rad2"]),
                                                          rel=0.15)


def test_sweep_adaptive_over_n(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--mode", "adaptive", "--axis", "n",
                 "--values", "1e2,1e3,1e4", "--trials", "200", "--seed", "5",
                 "--out", str(out)]) == 0
    rows = rows_of(out)
    assert len(rows) == 3
    for r in rows:
        n = float(r["value"])
        assert float(r["mse_rad2"]) == pytest.approx(1 / (2 * math.sqrt(n)), rel=0.10)


def test_sweep_bandwidth_minimum_flagged(tmp_path):
    lam_star = math.sqrt(2 * 1e3 * 1.0)
    values = ",".join(repr(float(v)) for v in lam_star * np.logspace(-0.5, 0.5, 5))
    out = tmp_path / "bw.csv"
    assert main(["sweep", "--mode", "heterodyne", "--axis", "bandwidth",
                 "--values", values, "--flux", "1e3", "--linewidth", "1",
                 "--trials", "100", "--seed", "2", "--out", str(out)]) == 0
    rows = rows_of(out)
    flagged = [r for r in rows if r["is_minimum"] == "1"]
    assert len(flagged) == 1
    assert min(rows, key=lambda r: float(r["mse_rad2"])) is \
        max(rows, key=lambda r: int(r["is_minimum"]))
    # the flagged minimum approximates 1/sqrt(2N)
    assert float(flagged[0]["mse_rad2"]) == pytest.approx(1 / math.sqrt(2e3), rel=0.15)


def test_sweep_empty_values_is_usage_error(tmp_path):
    out = tmp_path / "nope.csv"
    assert main(["sweep", "--mode", "adaptive", "--axis", "n", "--values", "",
                 "--out", str(out)]) == 2
    assert not out.exists()


def test_invalid_config_is_usage_error(tmp_path):
    assert main(["track", "--mode", "adaptive", "--flux", "-3",
                 "--linewidth", "1"]) == 2
    assert main(["sync", "--kappa", "1", "--mu", "0", "--parties", "2"]) == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    # unreachable channel mass target: distinct exit code naming the check
    out = tmp_path / "ch.csv"
    assert main(["channel", "--alpha-mod", "5", "--mass-deficit", "1e-12",
                 "--out", str(out)]) == 3
    err = capsys.readouterr().err
    assert "WindowError" in err


def test_channel_output(tmp_path):
    out = tmp_path / "chan.csv"
    assert main(["channel", "--alpha-mod", "5", "--alpha-arg", "0",
                 "--delta", "1", "--mass-deficit", "1e-4",
                 "--min-prob", "1e-4", "--out", str(out)]) == 0
    rows = rows_of(out)
    best = max(rows, key=lambda r: float(r["probability"]))
    assert (int(best["n"]), int(best["m"])) == (7, 0)
    assert float(best["output_amp_re"]) == pytest.approx(5.0, abs=0.2)
    meta = json.loads((tmp_path / "chan.json").read_text())
    assert meta["results"]["captured_mass"] >= 1 - 1e-4
    assert abs(meta["results"]["output_phase_rad"]) < 0.05


def test_phasevar_matches_library(tmp_path):
    out = tmp_path / "pv.csv"
    assert main(["phasevar", "--mu", "25", "--out", str(out)]) == 0
    row = rows_of(out)[0]
    assert float(row["phase_variance_rad2"]) == pytest.approx(0.0102117757, rel=1e-6)
    assert float(row["coherent_limit_rad2"]) == pytest.approx(0.01)


def test_linewidth_subcommand(tmp_path):
    out = tmp_path / "lw.csv"
    assert main(["linewidth", "--kappa", "1", "--mu", "8,16", "--out", str(out)]) == 0
    rows = rows_of(out)
    assert len(rows) == 2
    for r in rows:
        assert float(r["methods_rel_diff"]) < 0.02
    assert float(rows[0]["linewidth_eig_rad_per_s"]) == pytest.approx(0.03712959, rel=1e-4)
    assert float(rows[0]["sql_limit_rad_per_s"]) == pytest.approx(1 / 16)
