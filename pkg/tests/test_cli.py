import json

import numpy as np
import pytest

from mblsim.cli import main
from mblsim.lattice import kac_normalized_couplings


@pytest.fixture
def config(tmp_path):
    cfg = {
        "n": 6,
        "field_b": 4.0,
        "disorder_w": 3.0,
        "realizations": 2,
        "time_grid": {"t_min": 0.01, "t_max": 10.0, "points": 20},
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_modes(tmp_path, capsys):
    out = tmp_path / "j.csv"
    assert main(["modes", "--ions", "6", "--anisotropy", "10", "--detuning", "10.4", "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "alpha=" in text and "frequencies: 10 " in text
    assert len(out.read_text().splitlines()) == 6


def test_modes_errors(capsys):
    assert main(["modes", "--ions", "10", "--anisotropy", "1.5", "--detuning", "3"]) == 4
    assert main(["modes", "--ions", "2", "--anisotropy", "10", "--detuning", "10.0001"]) == 2
    assert "error" in capsys.readouterr().err


def test_fit_alpha(tmp_path, capsys):
    p = tmp_path / "j.csv"
    p.write_text(kac_normalized_couplings(8, 1.0, 1.7).to_csv())
    assert main(["fit-alpha", str(p)]) == 0
    out = capsys.readouterr().out
    alpha = float(out.split("alpha=")[1])
    assert alpha == pytest.approx(1.7, abs=1e-10)
    assert main(["fit-alpha", str(tmp_path / "missing.csv")]) == 2


def test_run_and_replay(config, tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["run", str(config), "-o", str(out)]) == 0
    assert (out / "config.json").exists() and (out / "series.csv").exists()
    assert "content_hash" in capsys.readouterr().out
    assert main(["replay", str(out), "--index", "1", "-o", str(tmp_path / "r.csv")]) == 0
    assert "max deviation 0" in capsys.readouterr().out
    assert (tmp_path / "r.csv").read_text().startswith("t,")
    assert main(["replay", str(out), "--index", "5"]) == 2


def test_run_worker_override_keeps_hash(config, tmp_path, capsys):
    main(["run", str(config), "-o", str(tmp_path / "a")])
    main(["run", str(config), "-o", str(tmp_path / "b"), "-j", "2"])
    a = json.loads((tmp_path / "a" / "result.json").read_text())["content_hash"]
    b = json.loads((tmp_path / "b" / "result.json").read_text())["content_hash"]
    assert a == b


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 6, "realizations": 0}))
    assert main(["run", str(bad), "-o", str(tmp_path / "x")]) == 2
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"n": 16}))
    assert main(["run", str(big), "-o", str(tmp_path / "x")]) == 3
    assert main(["run", str(tmp_path / "nope.json"), "-o", str(tmp_path / "x")]) == 2
    assert main(["run", "-o", str(tmp_path / "x")]) == 2


def test_sweep(config, tmp_path, capsys):
    assert main(["sweep", str(config), "--axis", "W", "--values", "0,4", "-o", str(tmp_path / "sw")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("W,") and len(out) == 3
    assert (tmp_path / "sw" / "summary.csv").exists()


def test_levelstats(config, tmp_path, capsys):
    assert main(["levelstats", str(config), "-o", str(tmp_path / "ls")]) == 0
    assert "mean_r" in capsys.readouterr().out
    assert (tmp_path / "ls" / "spacing_histogram.csv").exists()
    summary = (tmp_path / "ls" / "summary.csv").read_text().splitlines()
    assert summary[1].split(",")[2] == "2"


def test_preset_flag(tmp_path, capsys):
    assert main(["run", "--preset", "thermal", "-R", "1", "-o", str(tmp_path / "t")]) == 0
    cfg = json.loads((tmp_path / "t" / "config.json").read_text())
    assert cfg["disorder_w"] == 0.0 and cfg["n"] == 10
    series = np.loadtxt(tmp_path / "t" / "series.csv", delimiter=",", skiprows=1)
    assert series.shape[0] == 51
