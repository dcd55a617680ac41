import math

import pytest

from morph_wheel.config import RunConfig, load_config, parse_config, preset_names, read_preset
from morph_wheel.errors import ConfigError

SAMPLE = """\
[wheel]
crank_length_mm = 30.0
slider_length_mm = 40
wheel_weight_kg = 2.5

[simulation]
kind = "compare"
variants = ["morph", "fixed:80"]

[[terrain]]
length_m = 0.5
rolling_resistance = 0.02

[[terrain]]
length_m = 1.75
slope_deg = 7.0
rolling_resistance = 0.02
"""


def test_parse_sample():
    cfg = parse_config(SAMPLE)
    assert cfg.wheel.slider_length_mm == 40.0 and isinstance(cfg.wheel.slider_length_mm, float)
    assert [t.slope_deg for t in cfg.terrain] == [0.0, 7.0]
    assert cfg.design().wheel_weight == 2.5
    assert cfg.profile().extent == 2.25


def test_round_trip_preserves_everything():
    cfg = parse_config(SAMPLE)
    again = parse_config(cfg.dumps())
    assert again == cfg
    assert again.dumps() == cfg.dumps()


def test_hash_stable_and_sensitive():
    a, b = parse_config(SAMPLE), parse_config("# comment\n" + SAMPLE)
    assert a.sha256 == b.sha256 and len(a.sha256) == 64
    c = parse_config(SAMPLE.replace("2.5", "2.6"))
    assert c.sha256 != a.sha256


def test_defaults_equal_empty_file():
    assert parse_config("") == RunConfig()


@pytest.mark.parametrize("text, line, msg", [
    ("[wheel]\ncrank_length_mm = 30.0\nspoke_count = 6\n", 3, "unknown key 'spoke_count'"),
    ("[wheel]\nsegment_count = 6.5\n", 2, "integer"),
    ("[simulation]\nallow_expansion = 1\n", 2, "true or false"),
    ("[model_sweep]\nwheel_weights_kg = \"heavy\"\n", 2, "list"),
    ("\n[rover]\nx = 1\n", 2, "unknown key 'rover'"),
    ("[wheel\n", 1, "TOML"),
])
def test_errors_carry_line_numbers(text, line, msg):
    with pytest.raises(ConfigError, match=msg) as err:
        parse_config(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}: ")


def test_empty_weight_list_rejected():
    with pytest.raises(ConfigError, match="wheel_weights_kg"):
        parse_config("[model_sweep]\nwheel_weights_kg = []\n")


def test_bad_terrain_reports_its_table():
    text = SAMPLE.replace("slope_deg = 7.0", "slope_deg = 95.0")
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == 14


def test_wheel_validated_on_use():
    cfg = parse_config("[wheel]\nslider_length_mm = 65.0\n")
    with pytest.raises(ConfigError, match="wheel"):
        cfg.design()


def test_reverse_never_by_default():
    cfg = parse_config(SAMPLE)
    assert math.isinf(cfg.simulation.reverse_at_s)
    assert cfg.scenario().reverse_at is None


def test_scenario_load_override():
    sc = parse_config(SAMPLE).scenario(onboard_load=10.0)
    assert sc.vehicle.onboard_load == 10.0


@pytest.mark.parametrize("name", preset_names())
def test_presets_parse(name):
    cfg = load_config(name)
    cfg.design()
    assert parse_config(read_preset(name)) == cfg


def test_preset_listing():
    assert {"fig3_2c", "fig5_1", "fig5_2", "feasibility", "design_check"} <= set(preset_names())


def test_unknown_preset():
    with pytest.raises(ConfigError, match="no preset"):
        load_config("nonexistent")


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.toml")


def test_load_from_path(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(SAMPLE, encoding="utf-8")
    assert load_config(p) == parse_config(SAMPLE)
