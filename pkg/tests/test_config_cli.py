"""Config parsing, serialization round trips, CLI behavior, determinism."""
import json
import os
import subprocess
import sys

import pytest

from eitcbs.config import ConfigError, parse_config
from eitcbs.io import read_json, spectrum_csv_header
from eitcbs.cli import main

MINIMAL = """
mode = "spectrum"
seed = 1
rabi_over_gamma = 0.5
samples = 64
max_order = 3
delta_points = 3
delta_min_over_gamma = -1.0
delta_max_over_gamma = 1.0
"""


def test_parse_minimal_defaults_echoed():
    cfg = parse_config(MINIMAL, env={})
    assert cfg.mode == "spectrum"
    assert cfg.values["gaussian_radius_cm"] == 0.5
    assert cfg.values["peak_density_per_cm3"] == 3.2e10
    assert "gaussian_radius_cm" in cfg.defaults_applied
    assert "peak_density_per_cm3" in cfg.defaults_applied
    assert len(cfg.channels()) == 4


def test_parse_empty_lists_required():
    with pytest.raises(ConfigError, match="mode|seed|rabi"):
        parse_config("", env={})


def test_parse_unknown_keys_listed():
    with pytest.raises(ConfigError, match="bogus_key"):
        parse_config(MINIMAL + "\nbogus_key = 1\n", env={})


def test_parse_range_error_names_field():
    with pytest.raises(ConfigError, match="rabi_over_gamma"):
        parse_config(MINIMAL.replace("rabi_over_gamma = 0.5", "rabi_over_gamma = -1"), env={})


def test_parse_samples_required_for_spectrum():
    text = MINIMAL.replace("samples = 64\n", "")
    with pytest.raises(ConfigError, match="samples"):
        parse_config(text, env={})


def test_env_and_override_precedence():
    cfg = parse_config(MINIMAL, env={"EITCBS_SEED": "7"})
    assert cfg.seed == 7
    cfg = parse_config(MINIMAL, overrides={"seed": 9}, env={"EITCBS_SEED": "7"})
    assert cfg.seed == 9


def test_digest_stable():
    a = parse_config(MINIMAL, env={})
    b = parse_config(MINIMAL, env={})
    assert a.digest() == b.digest()


def test_csv_header_column_count():
    # 6 fixed columns + 2 (N_max - 1) per-order columns
    for n in (2, 5, 8):
        cols = spectrum_csv_header(n, per_order=True)
        assert len(cols) == 6 + 2 * (n - 1)
    assert len(spectrum_csv_header(8, per_order=False)) == 6


def _write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_cli_spectrum_run(tmp_path):
    cfg = _write_config(tmp_path, MINIMAL + f'\nout_dir = "{tmp_path}/out"\n')
    rc = main(["--config", cfg])
    assert rc == 0
    files = sorted(os.listdir(tmp_path / "out"))
    assert len([f for f in files if f.endswith(".csv")]) == 4
    body = (tmp_path / "out" / "spectrum_Hp_to_Hp.csv").read_text()
    header = body.splitlines()[0].split(",")
    assert header == spectrum_csv_header(3, True)
    assert len(body.splitlines()) == 4  # header + 3 points


def test_cli_json_round_trip(tmp_path):
    cfg = _write_config(
        tmp_path, MINIMAL + f'\nout_dir = "{tmp_path}/out"\nformat = "json"\n'
    )
    assert main(["--config", cfg]) == 0
    rec = read_json(str(tmp_path / "out" / "spectrum_Hp_to_Hm.json"))
    assert rec["schema"] == "eitcbs/spectrum-v1"
    assert rec["channel"] == "H+->H-"
    assert len(rec["points"]) == 3
    assert rec["metadata"]["defaults_applied"]
    assert rec["config"]["max_order"] == 3
    # round trip: re-serialize and compare
    assert json.loads(json.dumps(rec, sort_keys=True)) == rec


def test_cli_determinism_matches_workers(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    cfg = _write_config(tmp_path, MINIMAL)
    assert main(["--config", cfg, "--out", str(out1), "--workers", "1"]) == 0
    assert main(["--config", cfg, "--out", str(out2), "--workers", "3"]) == 0
    for name in os.listdir(out1):
        a = (out1 / name).read_text()
        b = (out2 / name).read_text()
        if name.endswith(".meta.json"):
            continue  # differs in the workers key of the echoed config
        assert a == b, name


def test_cli_identical_reruns_byte_identical(tmp_path):
    cfg = _write_config(tmp_path, MINIMAL)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["--config", cfg, "--out", str(out1)]) == 0
    assert main(["--config", cfg, "--out", str(out2)]) == 0
    for name in os.listdir(out1):
        if name.endswith(".meta.json"):
            continue  # echoes out_dir, which differs by construction
        assert (out1 / name).read_text() == (out2 / name).read_text()


def test_cli_config_error_exit_code(tmp_path):
    cfg = _write_config(tmp_path, MINIMAL + "\nnonsense = 3\n")
    assert main(["--config", cfg]) == 2
    cfg2 = _write_config(tmp_path, MINIMAL.replace("seed = 1", "seed = -4"))
    assert main(["--config", cfg2]) == 2


def test_cli_missing_config_file():
    assert main(["--config", "/nonexistent/path.toml"]) == 3


def test_cli_diagnostics_dark_point(tmp_path):
    text = """
mode = "diagnostics"
seed = 1
rabi_over_gamma = 0.5
diag_deltas_over_gamma = [0.0, 1.0]
format = "json"
"""
    cfg = _write_config(tmp_path, text + f'\nout_dir = "{tmp_path}/out"\n')
    assert main(["--config", cfg]) == 0
    rec = read_json(str(tmp_path / "out" / "diagnostics.json"))
    rows = {r["delta_over_gamma"]: r for r in rec["optical_depths"]}
    assert abs(rows[0.0]["b_sigma_plus"]) < 1e-10  # transparency at the dark point
    assert rows[1.0]["b_sigma_plus"] > 0.1
    assert rec["transparency_window_over_gamma"] > 0


def test_cli_pulse_smoke(tmp_path):
    text = """
mode = "pulse"
seed = 2
rabi_over_gamma = 0.5
samples = 64
max_order = 2
pulse_tau_gamma = 200.0
time_points = 64
channels = ["H+->H-"]
"""
    cfg = _write_config(tmp_path, text + f'\nout_dir = "{tmp_path}/out"\n')
    assert main(["--config", cfg]) == 0
    body = (tmp_path / "out" / "trace_Hp_to_Hm.csv").read_text()
    header = body.splitlines()[0].split(",")
    assert header == ["t_gamma", "single", "ladder_2", "crossed_2", "enhancement_t"]
    assert len(body.splitlines()) == 65


def test_cli_entry_point_subprocess(tmp_path):
    """The installed console script runs end to end."""
    cfg = _write_config(tmp_path, MINIMAL + f'\nout_dir = "{tmp_path}/out"\n')
    proc = subprocess.run(
        [sys.executable, "-m", "eitcbs.cli", "--config", cfg],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "spectrum_Hp_to_Hp" in proc.stdout


def test_emit_empty_points_header_only(tmp_path):
    from eitcbs.config import parse_config
    from eitcbs.io import emit, spectrum_record

    cfg = parse_config(MINIMAL, env={})
    record = spectrum_record(cfg, "H+->H+", [])
    paths = emit(record, str(tmp_path / "empty"), "csv", per_order=True)
    body = open(paths[0]).read()
    assert len(body.splitlines()) == 1
    assert body.startswith("delta_over_gamma,enhancement,err,")


def test_cli_diagnostics_pair_interference(tmp_path):
    """The strong-control diagnostics expose near-pi phase-shifted pairs,
    the double-scattering antilocalization mechanism."""
    text = """
mode = "diagnostics"
seed = 1
rabi_over_gamma = 3.0
diag_deltas_over_gamma = [1.75]
format = "json"
"""
    cfg = _write_config(tmp_path, text + f'\nout_dir = "{tmp_path}/out"\n')
    assert main(["--config", cfg]) == 0
    rec = read_json(str(tmp_path / "out" / "diagnostics.json"))
    pair = rec["pair_interference"]
    assert pair["channel"] == "H+->H+"
    entry = pair["detunings"][0]
    assert entry["n_channels"] > 0
    assert entry["destructive"], "expected phase-flipped reciprocal partners"
    ratios = [d["amplitude_ratio"] for d in entry["destructive"]]
    assert any(0.2 < r < 5.0 for r in ratios)  # comparable magnitudes
