"""CLI: subcommands, config precedence, exit codes, output writing."""

import json
import os

import pytest

from polyext.cli import load_config, main


def test_constants_output(capsys):
    assert main(["constants", "--beta-hat", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "lambda^2      = 0.287682" in out
    assert "sigma_star    = 0.757875" in out
    assert "naive_literal = 0.536360" in out
    assert "naive_normalized = 0.758528" in out


def test_rn_output(capsys):
    assert main(["rn", "--n", "2"]) == 0
    assert "R_2 = 0.390625" in capsys.readouterr().out
    assert main(["rn", "--n", "0"]) == 1


def test_variational_output(capsys):
    rc = main(["variational", "--m", "3", "--t", "1", "--a", "0",
               "--f", "1,1,1", "--grid-step", "0.1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "bound = 3" in out


def test_missing_config_file_exit_1(capsys):
    rc = main(["simulate", "--config", "/nonexistent/conf.txt"])
    assert rc == 1
    assert "/nonexistent/conf.txt" in capsys.readouterr().err


def test_unknown_flag_exit_1():
    assert main(["simulate", "--frobnicate", "1"]) == 1


def test_invalid_beta_exit_1(capsys):
    rc = main(["simulate", "--beta-hat", "1.2", "--n", "16", "--replicas", "1"])
    assert rc == 1
    assert "beta_hat" in capsys.readouterr().err


def test_budget_error_exit_2():
    rc = main(["extremes", "--n", "8192", "--replicas", "1"])
    assert rc == 2


def test_empty_config_defaults(tmp_path):
    cfg = tmp_path / "empty.conf"
    cfg.write_text("")
    values = load_config(str(cfg))
    assert values == {}  # all defaults fall through to ExperimentConfig
    from polyext.experiments import ExperimentConfig

    eff = ExperimentConfig(kind="simulate")
    assert (eff.N, eff.beta_hat, eff.M, eff.replicas, eff.seed) == (1024, 0.5, 8, 100, 1)


def test_config_parsing_and_all_errors_listed(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("N = 64\nbogus_key = 1\nreplicas = owl\nanother = x\n")
    with pytest.raises(ValueError) as exc:
        load_config(str(cfg))
    msg = str(exc.value)
    assert "bogus_key" in msg and "another" in msg and "replicas" in msg


def test_config_rejects_supercritical(tmp_path):
    cfg = tmp_path / "b.conf"
    cfg.write_text("beta_hat = 1.2\n")
    rc = main(["simulate", "--config", str(cfg)])
    assert rc == 1


def test_flag_overrides_file(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("N = 16\nreplicas = 3\nseed = 5\nwindow_mode = stat\n")
    out = tmp_path / "o.csv"
    rc = main(["simulate", "--config", str(cfg), "--replicas", "7", "--out", str(out)])
    assert rc == 0
    manifest = json.loads((tmp_path / "o.csv.manifest.json").read_text())
    assert manifest["config"]["replicas"] == 7  # flag beats file
    assert manifest["config"]["N"] == 16
    data = out.read_text().strip().split("\n")
    assert len(data) == 8


def test_threads_env_fallback(tmp_path, monkeypatch):
    cfg = tmp_path / "t.conf"
    cfg.write_text("N = 16\nreplicas = 2\nwindow_mode = stat\n")
    out = tmp_path / "t.csv"
    monkeypatch.setenv("POLYEXT_THREADS", "2")
    rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    manifest = json.loads((tmp_path / "t.csv.manifest.json").read_text())
    assert manifest["config"]["threads"] == 2
    monkeypatch.setenv("POLYEXT_THREADS", "owl")
    assert main(["simulate", "--config", str(cfg)]) == 1


def test_wall_mode_flag(tmp_path):
    out = tmp_path / "m.csv"
    rc = main(["multiscale", "--n", "16", "--m-scales", "2", "--replicas", "2",
               "--wall-mode", "origin", "--window-mode", "stat", "--out", str(out)])
    assert rc == 0
    manifest = json.loads((tmp_path / "m.csv.manifest.json").read_text())
    assert manifest["config"]["wall_mode"] == "origin"


def test_domination_subcommand(tmp_path):
    rc = main(["domination", "--n", "16", "--m-scales", "2", "--replicas", "2",
               "--window-mode", "stat"])
    assert rc == 0


def test_brw_subcommand(capsys):
    rc = main(["brw", "--depth", "8", "--replicas", "2", "--seed", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "v_inc" in out
