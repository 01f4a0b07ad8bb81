"""Config parsing, validation errors, serialization round-trip."""

import pytest

import rtdspike as rs
from rtdspike.config import load_config_text, preset_path, serialize_config

MINIMAL = """
[iv]
a = 5.665e-5
b = 0.068
c = 0.1013
d = 1.548e-3
n1 = 0.1576
n2 = 2.982e-2
h = 9.298e-5

[circuit]
c = 5e-15
l = 7e-8
r = 50.0
kappa = 1.86e-7

[laser]
gamma_m = 2e6
gamma_l = 8.6e9
gamma_nr = 8.6e9
n0 = 5e5
tau_p = 2e-12
eta = 0.2
r0 = 50.0
"""


class TestLoad:
    def test_minimal_config_loads_with_defaults(self):
        cfg = load_config_text(MINIMAL)
        assert cfg.sim.dt == 1e-13
        assert cfg.detection_channel == "v"
        assert cfg.kind is None
        # bias resolved from the default fraction
        assert cfg.circuit.v0 > 0.6

    def test_bundled_preset_reproduces_ndc_window(self, nano_config, nano_meta):
        assert 0.604 <= nano_meta.ndc_lo <= 0.614
        assert 0.715 <= nano_meta.ndc_hi <= 0.725

    def test_zero_capacitance_names_the_key(self):
        bad = MINIMAL.replace("c = 5e-15", "c = 0")
        with pytest.raises(rs.InvariantViolationError, match="c"):
            load_config_text(bad)

    def test_unknown_key_rejected(self):
        with pytest.raises(rs.UnknownKeyError, match="foo"):
            load_config_text(MINIMAL + "\n[sim]\nfoo = 1\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(rs.UnknownKeyError, match="mystery"):
            load_config_text(MINIMAL + "\n[mystery]\nx = 1\n")

    def test_parse_error_on_garbage(self):
        with pytest.raises(rs.ConfigParseError):
            load_config_text("not a config at all\n= = =")

    def test_non_numeric_value_rejected(self):
        with pytest.raises(rs.ConfigParseError, match="tau_p"):
            load_config_text(MINIMAL.replace("tau_p = 2e-12", "tau_p = fast"))

    def test_missing_required_section(self):
        headless = MINIMAL.replace("[laser]", "[sim]").replace("gamma_m = 2e6", "dt = 1e-13")
        with pytest.raises(rs.ConfigError):
            load_config_text(headless)

    def test_v0_and_bias_fraction_conflict(self):
        both = MINIMAL.replace("kappa = 1.86e-7",
                               "kappa = 1.86e-7\nv0 = 0.62\nbias_fraction = 0.98")
        with pytest.raises(rs.InvariantViolationError, match="bias_fraction"):
            load_config_text(both)

    def test_explicit_v0_is_used_verbatim(self):
        cfg = load_config_text(
            MINIMAL.replace("kappa = 1.86e-7", "kappa = 1.86e-7\nv0 = 0.5")
        )
        assert cfg.circuit.v0 == 0.5

    def test_unsorted_threshold_amplitudes_rejected(self):
        bad = MINIMAL + "\n[threshold]\namplitudes = 10, 5\npulse_width = 2e-11\n"
        with pytest.raises(rs.InvariantViolationError):
            load_config_text(bad)

    def test_boolean_parsing(self):
        cfg = load_config_text(MINIMAL + "\n[sim]\nnoise = yes\n")
        assert cfg.sim.noise_enabled is True
        with pytest.raises(rs.ConfigParseError):
            load_config_text(MINIMAL + "\n[sim]\nnoise = maybe\n")

    def test_branch_sections(self):
        text = MINIMAL + """
[branch.A]
kind = square
t0 = 1e-9
width = 6e-11
amplitude = 1000
polarity = 1

[branch.B]
kind = bipolar
t0 = 1e-9
width = 6e-11
amplitude = 1000
polarity = -1
"""
        cfg = load_config_text(text)
        assert [b.label for b in cfg.branches] == ["A", "B"]
        assert cfg.branches[1].polarity == -1

    def test_unknown_experiment_kind_rejected(self):
        with pytest.raises(rs.InvariantViolationError, match="kind"):
            load_config_text(MINIMAL + "\n[experiment]\nkind = teleport\n")

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(rs.ConfigParseError):
            rs.load_config(tmp_path / "nope.cfg")

    def test_unknown_preset_rejected(self):
        with pytest.raises(rs.ConfigParseError):
            preset_path("made-up")


class TestRoundTrip:
    def test_serialize_then_load_gives_equal_config(self):
        text = MINIMAL + """
[experiment]
kind = and
out_dir = out

[sim]
dt = 1e-13
duration = 3e-9
output_stride = 10
noise = true
seed = 77

[and]
deltas = 0.0, 3e-11, 9e-11
pulse_width = 6e-11

[refractory]
separations = 1e-10, 2e-10
pulse_width = 2e-11
amplitude_factor = 2.0
seeds = 20

[threshold]
amplitudes = 100.0, 200.0
pulse_width = 2e-11

[xor]
pulse_width = 6e-11

[branch.A]
kind = doublet
t0 = 1e-9
width = 2e-11
amplitude = 5000
separation = 3e-10
"""
        first = load_config_text(text)
        second = load_config_text(serialize_config(first))
        assert first == second

    def test_presets_round_trip(self):
        for name in ("nanoscale-default", "experimental-like"):
            cfg = rs.load_preset(name)
            assert load_config_text(serialize_config(cfg)) == cfg
