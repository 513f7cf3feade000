import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from vasifit import cli
from vasifit.simulate import PathGrid


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


SMALL = {"simulation": {"n": 100, "h": 0.4, "seed": 3}, "noise": {"hurst": 0.5}}


def test_simulate_rows(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "p.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,r1,r2"
    assert len(lines) == 102
    side = json.loads((tmp_path / "p.csv.config.json").read_text())
    assert side["command"] == "simulate"
    assert side["config"]["simulation"]["n"] == 100
    assert side["config"]["estimation"]["t_upper"] == 5.0


def test_simulate_deterministic(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    a, b, c = (tmp_path / x for x in ("a.csv", "b.csv", "c.csv"))
    cli.main(["simulate", "--config", cfg, "--out", str(a)])
    cli.main(["simulate", "--config", cfg, "--out", str(b)])
    cli.main(["simulate", "--config", cfg, "--out", str(c), "--seed", "4"])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_simulate_bad_hurst(tmp_path, capsys):
    cfg = write_config(tmp_path, {"noise": {"hurst": 1.5}})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "noise.hurst" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


@pytest.mark.parametrize("doc", [{"modle": {}}, {"noise": {"hurts": 0.5}}, {"noise": 3}, [1, 2]])
def test_unknown_keys_rejected(tmp_path, doc):
    cfg = write_config(tmp_path, doc)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert cli.main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2


def test_bad_model(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"theta": [[0.5, 0.2], [0.0, 0.3]]}})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_fit_pipeline(tmp_path):
    cfg = write_config(tmp_path, {"simulation": {"n": 10_000, "seed": 1}})
    path_csv, fit_json = tmp_path / "p.csv", tmp_path / "f.json"
    assert cli.main(["simulate", "--config", cfg, "--out", str(path_csv)]) == 0
    assert cli.main(["fit", str(path_csv), "--config", cfg, "--out", str(fit_json)]) == 0
    res = json.loads(fit_json.read_text())
    theta = np.array(res["theta_hat"])
    B, C, D = (np.array(res[k]) for k in ("B_hat", "C_hat", "D_hat"))
    scale = (np.linalg.norm(D) + np.linalg.norm(B) * np.linalg.norm(theta)
             + np.linalg.norm(C) * np.linalg.norm(theta) ** 2)
    assert res["care_residual"] <= 1e-8 * scale
    assert np.all(np.abs(theta - np.diag([0.5, 0.3])) < 0.15)


def test_fit_constant_path(tmp_path, capsys):
    path = PathGrid(0.0, 0.4, np.full((2, 200), 0.25))
    path.to_csv(tmp_path / "c.csv")
    out = tmp_path / "f.json"
    assert cli.main(["fit", str(tmp_path / "c.csv"), "--out", str(out)]) == 4
    doc = json.loads(out.read_text())
    assert doc["error"].startswith("DegenerateInputError")
    assert doc["diagnostics"]["sigma_sq_min_eig"] == 0.0


def test_fit_missing_input(tmp_path):
    assert cli.main(["fit", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f.json")]) == 5
    assert cli.main(["fit", "--out", str(tmp_path / "f.json")]) == 2


def test_fit_malformed_csv(tmp_path):
    (tmp_path / "m.csv").write_text("t,r1\n0,1\n0.4,abc\n")
    assert cli.main(["fit", str(tmp_path / "m.csv"), "--out", str(tmp_path / "f.json")]) == 5


MC = {"simulation": {"n": 500, "seed": 5}, "mc": {"replications": 4}}


def test_mc_outputs(tmp_path):
    cfg = write_config(tmp_path, MC)
    out = tmp_path / "mc"
    assert cli.main(["mc", "--config", cfg, "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "config.json", "histograms.csv", "replications.csv", "report.json"]
    rep = json.loads((out / "report.json").read_text())
    assert rep["metadata"]["replications"] == 4
    rows = list(csv.DictReader(open(out / "replications.csv")))
    assert len(rows) == 4


def test_mc_replications_flag_and_workers(tmp_path, monkeypatch):
    seen = {}
    real = cli.run_mc

    def spy(mc):
        seen["workers"] = mc.workers
        seen["replications"] = mc.replications
        return real(mc)

    monkeypatch.setattr(cli, "run_mc", spy)
    cfg = write_config(tmp_path, MC)
    monkeypatch.setenv("VASIFIT_WORKERS", "3")
    assert cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "a"), "--replications", "2"]) == 0
    assert seen == {"workers": 3, "replications": 2}
    assert cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "1"]) == 0
    assert seen["workers"] == 1
    monkeypatch.setenv("VASIFIT_WORKERS", "many")
    assert cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "c")]) == 2


def test_mc_workers_identical_files(tmp_path):
    cfg = write_config(tmp_path, MC)
    cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "w1"), "--workers", "1"])
    cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "w2"), "--workers", "2"])
    for name in ("config.json", "histograms.csv", "replications.csv", "report.json"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes(), name


def _rates_csv(tmp_path, n=400, seed=0):
    from conftest import example_path
    from vasifit.simulate import NONDIAGONAL_EXAMPLE

    _, _, path = example_path(NONDIAGONAL_EXAMPLE, n=n, h=1.0, seed=seed)
    lines = ["date,eur,dff"]
    day = np.datetime64("2001-01-01")
    for k in range(path.n + 1):
        lines.append(f"{day + k},{float(path.values[0, k])!r},{float(path.values[1, k])!r}")
    target = tmp_path / "rates.csv"
    target.write_text("\n".join(lines) + "\n")
    return target


def test_predict(tmp_path):
    data = _rates_csv(tmp_path)
    cfg = write_config(tmp_path, {"data": {"h": 1.0, "hurst_sweep": [0.5, 0.6]}})
    out = tmp_path / "pred.csv"
    assert cli.main(["predict", str(data), "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "date,actual_1,pred_1,actual_2,pred_2"
    assert len(lines) == 1 + 80
    metrics = json.loads((tmp_path / "pred.csv.metrics.json").read_text())
    assert metrics["n_holdout"] == 80 and metrics["fit_on"] == "train"
    assert set(metrics["hurst_sweep"]) == {"0.5", "0.6"}
    assert set(metrics["rmse"]) == {"eur", "dff"}


def test_predict_bad_dates(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("date,a\n" + "".join(f"2020-01-{k:02d},{k}\n" for k in (2, 1, 3, 4, 5, 6, 7, 8, 9, 10)))
    assert cli.main(["predict", str(data), "--out", str(tmp_path / "p.csv")]) == 5


def test_predict_bad_fraction(tmp_path):
    data = _rates_csv(tmp_path, n=50)
    cfg = write_config(tmp_path, {"data": {"holdout_fraction": 1.5}})
    assert cli.main(["predict", str(data), "--config", cfg, "--out", str(tmp_path / "p.csv")]) == 2


def test_noise_check(tmp_path):
    cfg = write_config(tmp_path, {"noise_check": {"n": 20_000, "hurst_values": [0.5],
                                                  "fbm_grid": 64, "fbm_replications": 500}})
    out = tmp_path / "nc.json"
    assert cli.main(["noise-check", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["qv_ratio"]["0.5"]["pass"]
    assert doc["fbm_covariance"]["0.5"]["pass"]


def test_console_entry_point(tmp_path):
    out = tmp_path / "p.csv"
    proc = subprocess.run([sys.executable, "-m", "vasifit", "simulate", "--out", str(out), "--seed", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 10_002
