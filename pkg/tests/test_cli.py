import json

import pytest

from morph_wheel import __version__
from morph_wheel.cli import main
from morph_wheel.config import load_config, read_preset


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def run_cli(*args):
    return main([str(a) for a in args])


def test_presets_command(capsys):
    assert run_cli("presets") == 0
    assert "fig5_2" in capsys.readouterr().out.split()


def test_model_sweep_outputs(tmp_path):
    assert run_cli("model-sweep", "--config", "fig3_2c", "--out", tmp_path) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["model_sweep.json", "stiffness_sweep.csv", "torque_curve_W1p8kg.csv",
                     "torque_curve_W2p3kg.csv", "torque_curve_W2p8kg.csv"]
    raw = (tmp_path / "torque_curve_W2p8kg.csv").read_bytes()
    head = raw.split(b"\r\n")
    assert head[0] == f"# morph-wheel {__version__}".encode()
    assert head[1] == f"# config_sha256 {load_config('fig3_2c').sha256}".encode()
    assert head[2] == b"theta_d_deg,delta_r_mm,tau_in_Nmm,F_s_N,F_out_N"
    assert len([r for r in head[3:] if r]) == 181


def test_outputs_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run_cli("model-sweep", "--config", "fig3_2c", "--out", d, "--format", "csv,json,svg") == 0
    files = sorted(p.name for p in a.iterdir())
    assert any(f.endswith(".svg") for f in files)
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_feasibility_summary(tmp_path):
    assert run_cli("feasibility", "--config", "feasibility", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "feasibility_summary.json").read_text())
    assert list(doc)[0] == "provenance"
    assert doc["upper_bound_kg"] == pytest.approx(3.0, abs=0.3)
    assert doc["grid_points"] == 100


def test_feasibility_degenerate_range(tmp_path):
    cfg = write(tmp_path, "[feasibility]\nw_min_kg = 2.7\nw_max_kg = 2.7\n")
    assert run_cli("feasibility", "--config", cfg, "--out", tmp_path / "o") == 0
    doc = json.loads((tmp_path / "o" / "feasibility_summary.json").read_text())
    assert doc["lower_bound_kg"] == doc["upper_bound_kg"] == 2.7


def test_empty_weight_list_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "[model_sweep]\nwheel_weights_kg = []\n")
    assert run_cli("model-sweep", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "line 2" in capsys.readouterr().err


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "[wheel]\n\nradius = 3\n")
    assert run_cli("design-check", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "line 3" in capsys.readouterr().err


def test_reference_design_check_passes(tmp_path):
    assert run_cli("design-check", "--config", "design_check", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "design_check.json").read_text())
    assert doc["passed"] and doc["violated"] == []
    assert doc["segments"]["min_segment_count"] == 5
    assert doc["strut"]["reference_satisfies_stroke"] is False


def test_long_slider_fails_singularity(tmp_path, capsys):
    cfg = write(tmp_path, read_preset("design_check").replace("slider_length_mm = 40.0",
                                                              "slider_length_mm = 65.0"))
    assert run_cli("design-check", "--config", cfg, "--out", tmp_path / "o") == 1
    err = capsys.readouterr().err
    assert "singularity_avoidance" in err
    doc = json.loads((tmp_path / "o" / "design_check.json").read_text())
    assert "singularity_avoidance" in doc["violated"]


def test_four_segments_fail_amplitude(tmp_path, capsys):
    cfg = write(tmp_path, read_preset("design_check").replace("segment_count = 6",
                                                              "segment_count = 4"))
    assert run_cli("design-check", "--config", cfg, "--out", tmp_path / "o") == 1
    assert "displacement_amplitude" in capsys.readouterr().err


def test_missing_config_file_is_io_error(tmp_path):
    assert run_cli("feasibility", "--config", tmp_path / "nope.toml", "--out", tmp_path) == 3


def test_missing_config_flag(tmp_path):
    assert run_cli("feasibility") == 2


def test_unknown_format(tmp_path):
    assert run_cli("feasibility", "--config", "feasibility", "--out", tmp_path, "--format", "xlsx") == 2


def test_simulate_compare(tmp_path):
    assert run_cli("simulate", "--config", "fig5_2", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "comparison.json").read_text())
    assert doc["baseline"] == "morph"
    assert (tmp_path / "trace_fixed_80.csv").exists()


def test_simulate_bidirectional(tmp_path):
    assert run_cli("simulate", "--config", "bidirectional", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "symmetry.json").read_text())
    assert doc["passed"] is True


def test_simulate_load_sweep(tmp_path):
    assert run_cli("simulate", "--config", "fig5_1", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "load_sweep.json").read_text())
    r = doc["morph_steady_radius_mm"]
    assert len(r) == len(doc["onboard_loads_kg"])
    assert all(b <= a for a, b in zip(r, r[1:]))
