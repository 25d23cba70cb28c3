import json

import pytest

from quadchase.cli import main

FAST_CONFIG = """
sim.kind = stationary
sim.duration = 2.0
sim.vehicle_start = 0.5, -0.5
sim.quad_start = 0.5, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.5, 0.0
"""


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CONFIG, encoding="utf-8")
    return str(path)


def test_run_writes_artifacts(fast_config, tmp_path):
    out = tmp_path / "out"
    code = main(["--config", fast_config, "--out", str(out), "run"])
    assert code == 0
    assert (out / "stationary.csv").exists()
    assert (out / "stationary.json").exists()
    assert (out / "stationary_metrics.json").exists()
    assert (out / "stationary_telemetry.csv").exists()
    metrics = json.loads((out / "stationary_metrics.json").read_text())
    assert metrics["faults"] == 0
    assert metrics["steady_state_error"] <= 1e-3


def test_invalid_config_exits_2(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sim.bogus_key = 1\n", encoding="utf-8")
    assert main(["--config", str(bad), "--out", str(tmp_path), "run"]) == 2


def test_missing_config_exits_2(tmp_path):
    assert main(["--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path), "run"]) == 2


def test_bad_usage_exits_2(tmp_path, capsys):
    assert main(["frobnicate"]) == 2


def test_invalid_horizon_exits_2(tmp_path):
    cfg = tmp_path / "n0.cfg"
    cfg.write_text("mpc.horizon = 0\n", encoding="utf-8")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "run"]) == 2


def test_sweep_degenerate_grid_matches_run(fast_config, tmp_path):
    out = tmp_path / "sweep"
    code = main(["--config", fast_config, "--out", str(out), "--seed", "5",
                 "sweep", "--sigmas", "0", "--delays", "0"])
    assert code == 0
    body = (out / "sweep.csv").read_text().splitlines()
    assert body[0] == "sigma,delay,steady_state_error,peak_error,faults"
    assert len(body) == 2
    sigma, delay, steady, peak, faults = body[1].split(",")
    assert float(sigma) == 0.0 and int(delay) == 0

    out2 = tmp_path / "run"
    main(["--config", fast_config, "--out", str(out2), "--seed", "5", "run"])
    metrics = json.loads((out2 / "stationary_metrics.json").read_text())
    assert float(steady) == pytest.approx(metrics["steady_state_error"], abs=1e-12)


def test_seed_env_override(fast_config, tmp_path, monkeypatch):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    monkeypatch.setenv("QUADCHASE_SEED", "77")
    main(["--config", fast_config, "--out", str(out_a), "run"])
    monkeypatch.delenv("QUADCHASE_SEED")
    main(["--config", fast_config, "--out", str(out_b), "--seed", "77", "run"])
    assert (out_a / "stationary.csv").read_text() == \
        (out_b / "stationary.csv").read_text()


def test_artifacts_deterministic_across_invocations(fast_config, tmp_path):
    out_a = tmp_path / "da"
    out_b = tmp_path / "db"
    main(["--config", fast_config, "--out", str(out_a), "--seed", "3", "run"])
    main(["--config", fast_config, "--out", str(out_b), "--seed", "3", "run"])
    assert (out_a / "stationary.csv").read_bytes() == \
        (out_b / "stationary.csv").read_bytes()


def test_print_config_roundtrip(fast_config, capsys):
    assert main(["--config", fast_config, "print-config"]) == 0
    text = capsys.readouterr().out
    assert "sim.kind = stationary" in text
    assert "mpc.horizon = 20" in text
