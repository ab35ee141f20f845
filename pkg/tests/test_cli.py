"""Tests for the command-line front end."""

import json
import os

import pytest

from noisychain.cli import main

CONFIG = """
[model]
n = 4

[noise]
gammas = [0.0, 0.02]

[evolution]
dt = 0.05
t_max = 4.0

[backend]
kind = "ed"

[run]
seed = 5
"""


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """One finished sweep shared by the post-processing commands."""
    base = tmp_path_factory.mktemp("cli")
    config_path = base / "config.toml"
    config_path.write_text(CONFIG)
    out = str(base / "run")
    assert main(["run", "--config", str(config_path), "--out", out]) == 0
    return out


def test_run_writes_manifest_and_reports(run_dir, capsys):
    assert os.path.exists(os.path.join(run_dir, "manifest.json"))
    assert os.path.exists(os.path.join(run_dir, "ideal.csv"))


def test_run_prints_summary(tmp_path, capsys):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG.replace("t_max = 4.0", "t_max = 0.1"))
    out = str(tmp_path / "run")
    assert main(["run", "--config", str(config_path), "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "series files and manifest.json" in stdout
    assert "config sha256" in stdout


def test_run_overrides_seed_and_workers(tmp_path):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG.replace("t_max = 4.0", "t_max = 0.1"))
    out = str(tmp_path / "run")
    assert main(["run", "--config", str(config_path), "--out", out,
                 "--seed", "9", "--workers", "1"]) == 0
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["config"]["seed"] == 9
    assert manifest["config"]["workers"] == 1


def test_run_preset_listed_in_choices():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--preset", "nonexistent", "--out", "x"])
    assert exc.value.code == 2


def test_run_requires_config_or_preset():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--out", "x"])
    assert exc.value.code == 2


def test_run_preset_and_config_mutually_exclusive(tmp_path):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG)
    with pytest.raises(SystemExit) as exc:
        main(["run", "--preset", "golden-n4", "--config", str(config_path)])
    assert exc.value.code == 2


def test_run_without_output_location(tmp_path, capsys):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG.replace("t_max = 4.0", "t_max = 0.1"))
    assert main(["run", "--config", str(config_path)]) == 2
    assert "no output directory" in capsys.readouterr().err


def test_surface_writes_two_csvs(run_dir, capsys):
    assert main(["surface", run_dir]) == 0
    stdout = capsys.readouterr().out
    surface = os.path.join(run_dir, "surface_czz.csv")
    threshold = os.path.join(run_dir, "surface_czz_threshold.csv")
    assert os.path.exists(surface)
    assert os.path.exists(threshold)
    assert "gamma 0.02" in stdout
    with open(surface) as fh:
        header = fh.readline().strip()
    assert header == "gamma,t,epsilon"
    # every data line must parse as three floats
    with open(surface) as fh:
        fh.readline()
        for line in fh:
            g, t, eps = line.strip().split(",")
            float(g), float(t), float(eps)


def test_surface_observable_and_out_override(run_dir, tmp_path):
    out = str(tmp_path / "lam.csv")
    assert main(["surface", run_dir, "--observable", "return_rate", "--out", out]) == 0
    assert os.path.exists(out)
    assert os.path.exists(str(tmp_path / "lam_threshold.csv"))


def test_surface_requires_mitigated_series(tmp_path, capsys):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG.replace("gammas = [0.0, 0.02]", "gammas = [0.0]")
                           .replace("t_max = 4.0", "t_max = 0.1"))
    out = str(tmp_path / "run")
    assert main(["run", "--config", str(config_path), "--out", out]) == 0
    capsys.readouterr()
    assert main(["surface", out]) == 2
    assert "no mitigated series" in capsys.readouterr().err


def test_dqpt_report_writes_json(run_dir, capsys):
    assert main(["dqpt-report", run_dir]) == 0
    stdout = capsys.readouterr().out
    path = os.path.join(run_dir, "dqpt_report.json")
    assert os.path.exists(path)
    with open(path) as fh:
        payload = json.load(fh)
    assert payload["kind"] == "dqpt_report"
    assert payload["half_width"] == 0.5
    assert "ideal peaks at t" in stdout
    # the quench shows its first transition before t = 4
    assert payload["peak_times"], stdout


def test_dqpt_report_window_flag(run_dir, tmp_path):
    out = str(tmp_path / "report.json")
    assert main(["dqpt-report", run_dir, "--window", "0.75", "--out", out]) == 0
    with open(out) as fh:
        payload = json.load(fh)
    assert payload["half_width"] == 0.75


def test_dqpt_report_requires_noisy_series(tmp_path, capsys):
    config_path = tmp_path / "config.toml"
    config_path.write_text(CONFIG.replace("gammas = [0.0, 0.02]", "gammas = [0.0]")
                           .replace("t_max = 4.0", "t_max = 0.1"))
    out = str(tmp_path / "run")
    assert main(["run", "--config", str(config_path), "--out", out]) == 0
    capsys.readouterr()
    assert main(["dqpt-report", out]) == 2
    assert "no unscaled noisy series" in capsys.readouterr().err


def test_validate_passes(capsys):
    assert main(["validate"]) == 0
    stdout = capsys.readouterr().out
    assert "11/11 checks passed" in stdout
    assert "FAIL" not in stdout


def test_unknown_command_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2
