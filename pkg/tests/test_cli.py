import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from unruhsim.cli import OUTPUT_DIR_ENV, main
from unruhsim.config import ConfigError, bundled_configs, load_config, parse_config

TRAJ_TOML = """
[pulse]
shape = "gaussian"
E0 = 0.01
width = 0.3

[output]
directory = "ignored"
formats = ["csv"]
"""


def _csv_body(path):
    rows = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    header, data = rows[0].split(","), [r.split(",") for r in rows[1:]]
    return header, data


@pytest.fixture
def traj_cfg(tmp_path):
    p = tmp_path / "traj.toml"
    p.write_text(TRAJ_TOML)
    return p


def test_bundled_configs_all_parse():
    names = set(bundled_configs())
    assert {"dominance-map", "static-fixture", "field-sweep", "slopes", "vacuum"} <= names
    for name in names:
        load_config(name)


def test_static_fixture_matches_closed_form(tmp_path):
    assert main(["map", "--config", "static-fixture", "--out", str(tmp_path)]) == 0
    header, data = _csv_body(tmp_path / "static_fixture.csv")
    assert len(data) == 20 * 20
    rel = np.array([float(r[header.index("rel_error")]) for r in data])
    assert rel.max() < 1e-8
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["fixture_max_rel_error"] == pytest.approx(rel.max())


def test_empty_sweep_list_is_a_config_error(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('[pulse]\nE0 = 0.01\nwidth = 0.3\n\n[sweep]\nparameter = "E0"\nvalues = []\n')
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "sweep.values" in err
    assert f"{p}:7:" in err


def test_unknown_key_is_rejected_with_line(tmp_path, capsys):
    p = tmp_path / "typo.toml"
    p.write_text("[pulse]\nE0 = 0.01\nwidht = 0.3\n")
    assert main(["trajectory", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "widht" in err and f"{p}:3:" in err


def test_parse_config_reports_every_problem():
    with pytest.raises(ConfigError) as info:
        parse_config('[pulse]\nE0 = -1.0\nwidth = 0.3\nwidth_unit = "parsec"\n')
    assert len(info.value.diagnostics) == 2


def test_missing_section_is_a_config_error(tmp_path):
    p = tmp_path / "empty.toml"
    p.write_text("")
    assert main(["vacuum", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_is_an_io_error(tmp_path):
    assert main(["trajectory", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 4


def test_unwritable_output_is_an_io_error(tmp_path, traj_cfg):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(blocker / "sub")]) == 4


def test_trajectory_outputs_and_manifest(tmp_path, traj_cfg):
    out = tmp_path / "out"
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["gamma_max"] > 1
    for entry in manifest["files"]:
        data = (out / entry["name"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]
    header, data = _csv_body(out / "trajectory.csv")
    assert header == ["t", "z", "beta", "gamma"]
    beta = np.array([float(r[2]) for r in data])
    assert np.all((beta >= 0) & (beta < 1))


def test_outputs_are_byte_identical_across_runs(tmp_path, traj_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(a)]) == 0
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_output_directory_precedence(tmp_path, traj_cfg, monkeypatch):
    monkeypatch.chdir(tmp_path)
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(env_dir))
    assert main(["trajectory", "--config", str(traj_cfg)]) == 0
    assert (env_dir / "manifest.json").exists()
    assert not (tmp_path / "ignored").exists()
    cli_dir = tmp_path / "from-cli"
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(cli_dir)]) == 0
    assert (cli_dir / "manifest.json").exists()
    monkeypatch.delenv(OUTPUT_DIR_ENV)
    assert main(["trajectory", "--config", str(traj_cfg)]) == 0
    assert (tmp_path / "ignored" / "manifest.json").exists()


def test_vacuum_subcommand(tmp_path):
    assert main(["vacuum", "--config", "vacuum", "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["permittivity_fd_max_deviation"] < 1e-9
    assert m["degenerate"] is False
    # B0 is along x, so the mode polarized along y (e2 on the z axis) leaks
    assert abs(m["leakage_e2"]) == pytest.approx(m["leakage_closed_formula"], rel=5e-2)
    assert abs(m["leakage_e1"]) < 1e-9 * abs(m["leakage_e2"])


def test_tolerance_scale_is_recorded(tmp_path, traj_cfg):
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(tmp_path), "--tolerance-scale", "10"]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["abs_tol"] == pytest.approx(1e-11)
    assert main(["trajectory", "--config", str(traj_cfg), "--out", str(tmp_path), "--tolerance-scale", "0"]) == 2


def test_console_entry_point(tmp_path, traj_cfg):
    env = dict(os.environ)
    env[OUTPUT_DIR_ENV] = str(tmp_path / "sub")
    proc = subprocess.run(
        [sys.executable, "-m", "unruhsim.cli", "trajectory", "--config", str(traj_cfg)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sub" / "trajectory.csv").exists()
