import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from spdclayers.cli import main
from spdclayers.exports import read_csv
from spdclayers.runconfig import ConfigError, build_pump, build_stack, load_config

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "spdclayers" / "configs"


def write_config(tmp_path, body: str) -> str:
    p = tmp_path / "run.cfg"
    p.write_text(body)
    return str(p)


MINI = """
[structure]
material_a = "GaN"
material_b = "AlN"
layers = 5
length_a_nm = 88.374
length_b_nm = 73.449

[pump]
wavelength_nm = 400.0
r_p_mm = "inf"
polarization_deg = 0.0

[transmission]
vs = "theta"
wavelength_nm = 800.0
n_points = 64

[spectrum]
omega_ratio_min = 0.9
omega_ratio_max = 1.1
n_omega = 12
theta_min_deg = 20.0
theta_max_deg = 50.0
n_theta = 10
"""


def test_load_shipped_configs():
    for name in ("n11.cfg", "n51.cfg", "n101.cfg"):
        cfg = load_config(CONFIG_DIR / name)
        stack = build_stack(cfg)
        pump = build_pump(cfg)
        assert stack.n_layers in (11, 51, 101)
        assert pump.collimated


def test_unknown_key_rejected(tmp_path):
    bad = MINI + "\n[pump2]\nx = 1\n"
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, bad))
    bad = MINI.replace("r_p_mm", "rp_mm")
    with pytest.raises(ConfigError) as err:
        load_config(write_config(tmp_path, bad))
    assert "rp_mm" in str(err.value)


def test_explicit_layer_list(tmp_path):
    body = """
[structure]
layers_list = [
  {material = "GaN", length_nm = 90.0},
  {material = "AlN", length_nm = 75.0},
  {material = "GaN", length_nm = 90.0},
]

[pump]
wavelength_nm = 400.0
"""
    cfg = load_config(write_config(tmp_path, body))
    stack = build_stack(cfg)
    assert [ly.material.name for ly in stack.layers] == ["GaN", "AlN", "GaN"]


def test_validate_subcommand(tmp_path, capsys):
    path = write_config(tmp_path, MINI)
    assert main(["validate", "--config", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] is True


def test_malformed_config_exit_code_and_json(tmp_path, capsys):
    path = write_config(tmp_path, MINI.replace("wavelength_nm = 400.0",
                                               "wavelenght_nm = 400.0"))
    code = main(["validate", "--config", path])
    assert code == 2
    err = json.loads(capsys.readouterr().out)
    assert err["error"]["code"] == "config"
    assert "wavelenght_nm" in err["error"]["key"] or "wavelength_nm" in err["error"]["message"]


def test_missing_config_file(tmp_path, capsys):
    code = main(["validate", "--config", str(tmp_path / "nope.cfg")])
    assert code == 2
    json.loads(capsys.readouterr().out)


def test_transmission_run_and_determinism(tmp_path, capsys):
    path = write_config(tmp_path, MINI)
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["transmission", "--config", path, "--out", str(out1)]) == 0
    assert main(["transmission", "--config", path, "--out", str(out2)]) == 0
    capsys.readouterr()
    b1 = (out1 / "transmission.csv").read_bytes()
    b2 = (out2 / "transmission.csv").read_bytes()
    assert b1 == b2
    meta, cols, data = read_csv(out1 / "transmission.csv")
    assert cols == ["theta_deg", "T_TE", "T_TM"]
    assert np.all((data[:, 1] >= 0) & (data[:, 1] <= 1 + 1e-12))
    assert "config_sha256" in meta


def test_spectrum_run_with_grid_override(tmp_path, capsys):
    path = write_config(tmp_path, MINI)
    out = tmp_path / "out"
    assert main(["spectrum", "--config", path, "--out", str(out),
                 "--grid", "8x6"]) == 0
    capsys.readouterr()
    meta, cols, data = read_csv(out / "spectrum.csv")
    assert cols == ["omega_ratio", "theta_s_deg", "eta"]
    assert data.shape[0] == 8 * 6
    assert np.all(data[:, 2] >= 0)


def test_bad_grid_flag(tmp_path, capsys):
    path = write_config(tmp_path, MINI)
    assert main(["spectrum", "--config", path, "--grid", "axb"]) == 2
    json.loads(capsys.readouterr().out)


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("spdclayers")
    if exe is None:
        pytest.skip("console script not installed")
    path = write_config(tmp_path, MINI)
    proc = subprocess.run([exe, "validate", "--config", path],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"] is True
