import math

import pytest
from hypothesis import given, strategies as st

from hvlab.angles import parse_angle, parse_grid
from hvlab.errors import ConfigError
from hvlab.manifest import RunManifest, load_config_file


@pytest.mark.parametrize("text,value", [
    ("0", 0.0), ("pi/8", math.pi / 8), ("3*pi/8", 3 * math.pi / 8), ("-pi/4", -math.pi / 4),
    ("(1+2)*pi/6", math.pi / 2), ("0.25", 0.25), ("1e-3", 1e-3), (0.7, 0.7), (2, 2.0),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["", "pi**2", "__import__('os')", "tau", "pi/0", "1e400", "pi;1", "[1]", "True"])
def test_parse_angle_rejects(text):
    with pytest.raises(ConfigError):
        parse_angle(text)


@given(st.integers(-50, 50), st.integers(1, 64))
def test_parse_angle_pi_fractions(k, d):
    assert parse_angle(f"{k}*pi/{d}") == pytest.approx(k * math.pi / d, rel=1e-15, abs=1e-15)


def test_grid_inclusive_stop():
    g = parse_grid("0:pi:pi/16")
    assert len(g) == 17
    assert g[-1] == pytest.approx(math.pi)
    assert parse_grid("0,pi/4, pi/2") == pytest.approx([0, math.pi / 4, math.pi / 2])


@pytest.mark.parametrize("text", ["0:1", "0:1:0", "1:0:0.1", "0:1:-1"])
def test_grid_rejects(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


scalars = st.one_of(st.integers(-2 ** 40, 2 ** 40), st.text(max_size=12), st.booleans(),
                    st.floats(allow_nan=False, allow_infinity=False))


@given(st.dictionaries(st.from_regex(r"[a-z_]{1,8}", fullmatch=True), scalars, max_size=6),
       st.integers(0, 2 ** 63), st.integers(1, 64))
def test_manifest_round_trip(config, seed, partitions):
    m = RunManifest("bell", config, seed, partitions=partitions, duration_s=1.25, extra={"note": "x"})
    back = RunManifest.from_toml(m.to_toml())
    assert back == m
    assert back.content_hash() == m.content_hash()


def test_hash_ignores_partitions_and_time():
    a = RunManifest("bell", {"n": 10}, 1, partitions=1, duration_s=0.1)
    b = RunManifest("bell", {"n": 10}, 1, partitions=8, duration_s=9.0)
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != RunManifest("bell", {"n": 11}, 1).content_hash()
    assert a.content_hash() != RunManifest("bell", {"n": 10}, 2).content_hash()


def test_load_flat_and_manifest_configs(tmp_path):
    flat = tmp_path / "run.toml"
    flat.write_text('state = "phi-plus"\ndelta-grid = "0:pi:pi/4"\nseed = 3\n')
    assert load_config_file(flat) == {"state": "phi-plus", "delta_grid": "0:pi:pi/4", "seed": 3}
    man = tmp_path / "m.toml"
    man.write_text(RunManifest("malus", {"alpha": "pi/6"}, 9).to_toml())
    assert load_config_file(man) == {"alpha": "pi/6", "seed": 9, "_subcommand": "malus"}


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("= nope")
    with pytest.raises(ConfigError):
        load_config_file(bad)
    with pytest.raises(ConfigError):
        RunManifest.from_toml("seed = 1")
