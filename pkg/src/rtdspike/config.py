"""Experiment configuration: sectioned key/value files, validation, round-trip.

The format is flat INI-style text, one section per parameter block.  All
quantities are SI base-unit floats.  Unknown sections or keys are rejected,
and every module invariant is checked at load time so a config that loads
is a config that runs.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .dynamics import CircuitParams, LaserParams, SimConfig, System, bias_for_fraction
from .errors import ConfigParseError, InvariantViolationError, UnknownKeyError
from .iv import SchulmanIV

__all__ = [
    "ExperimentConfig",
    "BranchSpec",
    "ThresholdSpec",
    "RefractorySpec",
    "AndSpec",
    "XorSpec",
    "load_config",
    "load_config_text",
    "serialize_config",
    "preset_path",
    "load_preset",
    "EXPERIMENT_KINDS",
]

EXPERIMENT_KINDS = (
    "simulate", "iv", "threshold", "refractory", "and", "xor", "convergence",
)

DEFAULT_BIAS_FRACTION = 0.98


@dataclass(frozen=True)
class BranchSpec:
    """One declared optical input branch."""

    label: str
    kind: str = "square"          # square | doublet | bipolar
    t0: float = 0.0
    width: float = 1e-12
    amplitude: float = 0.0
    separation: float = 0.0       # doublet only
    pulse_polarity: int = 1       # bipolar only
    polarity: int = 1
    baseline: float = 0.0

    def __post_init__(self):
        if self.kind not in ("square", "doublet", "bipolar"):
            raise ValueError(f"unknown branch kind {self.kind!r}")


@dataclass(frozen=True)
class ThresholdSpec:
    amplitudes: tuple[float, ...]
    pulse_width: float


@dataclass(frozen=True)
class RefractorySpec:
    separations: tuple[float, ...]
    pulse_width: float
    amplitude: Optional[float] = None      # absolute; None -> factor * threshold
    amplitude_factor: float = 2.0
    seeds: int = 20


@dataclass(frozen=True)
class AndSpec:
    deltas: tuple[float, ...]
    pulse_width: float
    amplitude: Optional[float] = None      # None -> 0.7 * threshold


@dataclass(frozen=True)
class XorSpec:
    pulse_width: float
    amplitude: Optional[float] = None      # None -> 2 * half-width threshold


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment description."""

    iv: SchulmanIV
    circuit: CircuitParams
    laser: LaserParams
    sim: SimConfig = field(default_factory=SimConfig)
    detection_upper: float = 0.5
    detection_lower: float = 0.2
    detection_channel: str = "v"
    kind: Optional[str] = None
    out_dir: Optional[str] = None
    threshold: Optional[ThresholdSpec] = None
    refractory: Optional[RefractorySpec] = None
    and_spec: Optional[AndSpec] = None
    xor_spec: Optional[XorSpec] = None
    branches: tuple[BranchSpec, ...] = ()

    @property
    def system(self) -> System:
        return System(iv=self.iv, circuit=self.circuit, laser=self.laser)


_SECTION_KEYS = {
    "iv": {"a", "b", "c", "d", "n1", "n2", "h", "vt"},
    "circuit": {"c", "l", "r", "kappa", "v0", "bias_fraction"},
    "laser": {"gamma_m", "gamma_l", "gamma_nr", "n0", "tau_p", "eta", "r0", "q_e"},
    "sim": {"dt", "duration", "output_stride", "noise", "seed"},
    "detection": {"upper", "lower", "channel"},
    "experiment": {"kind", "out_dir"},
    "threshold": {"amplitudes", "pulse_width"},
    "refractory": {"separations", "pulse_width", "amplitude", "amplitude_factor", "seeds"},
    "and": {"deltas", "pulse_width", "amplitude"},
    "xor": {"pulse_width", "amplitude"},
}
_BRANCH_KEYS = {
    "kind", "t0", "width", "amplitude", "separation", "pulse_polarity",
    "polarity", "baseline",
}


class _Section:
    """One parsed section with typed getters that name the offending key."""

    def __init__(self, name: str, items: dict):
        self.name = name
        self.items = items

    def get_float(self, key, default=None):
        if key not in self.items:
            if default is None:
                raise InvariantViolationError(f"[{self.name}] missing required key '{key}'")
            return default
        raw = self.items[key]
        try:
            value = float(raw)
        except ValueError as exc:
            raise ConfigParseError(f"[{self.name}] {key} = {raw!r} is not a number") from exc
        if not math.isfinite(value):
            raise InvariantViolationError(f"[{self.name}] {key} must be finite")
        return value

    def get_int(self, key, default=None):
        value = self.get_float(key, default)
        if value != int(value):
            raise ConfigParseError(f"[{self.name}] {key} must be an integer")
        return int(value)

    def get_bool(self, key, default):
        if key not in self.items:
            return default
        raw = self.items[key].strip().lower()
        if raw in ("true", "1", "yes", "on"):
            return True
        if raw in ("false", "0", "no", "off"):
            return False
        raise ConfigParseError(f"[{self.name}] {key} = {raw!r} is not a boolean")

    def get_str(self, key, default=None):
        if key not in self.items:
            if default is None:
                raise InvariantViolationError(f"[{self.name}] missing required key '{key}'")
            return default
        return self.items[key].strip()

    def get_float_list(self, key):
        raw = self.get_str(key)
        try:
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigParseError(f"[{self.name}] {key} = {raw!r} is not a number list") from exc

    def has(self, key):
        return key in self.items


def _build(section: _Section, cls, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise InvariantViolationError(f"[{section.name}] {exc}") from exc


def load_config_text(text: str) -> ExperimentConfig:
    """Parse and validate config text (see load_config)."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigParseError(str(exc)) from exc

    sections: dict[str, _Section] = {}
    for name in parser.sections():
        if name.startswith("branch."):
            keys = _BRANCH_KEYS
        elif name in _SECTION_KEYS:
            keys = _SECTION_KEYS[name]
        else:
            raise UnknownKeyError(f"unknown section [{name}]")
        items = dict(parser.items(name))
        unknown = set(items) - keys
        if unknown:
            raise UnknownKeyError(f"unknown key(s) {sorted(unknown)!r} in section [{name}]")
        sections[name] = _Section(name, items)

    for required in ("iv", "circuit", "laser"):
        if required not in sections:
            raise InvariantViolationError(f"missing required section [{required}]")

    sec = sections["iv"]
    iv = _build(
        sec, SchulmanIV,
        a=sec.get_float("a"), b=sec.get_float("b"), c=sec.get_float("c"),
        d=sec.get_float("d"), n1=sec.get_float("n1"), n2=sec.get_float("n2"),
        h=sec.get_float("h"), vt=sec.get_float("vt", 2.5852e-2),
    )

    sec = sections["circuit"]
    r = sec.get_float("r")
    if sec.has("v0"):
        if sec.has("bias_fraction"):
            raise InvariantViolationError("[circuit] give either v0 or bias_fraction, not both")
        v0 = sec.get_float("v0")
    else:
        fraction = sec.get_float("bias_fraction", DEFAULT_BIAS_FRACTION)
        try:
            v0 = bias_for_fraction(iv, r, fraction)
        except Exception as exc:
            raise InvariantViolationError(f"[circuit] bias_fraction: {exc}") from exc
    circuit = _build(
        sec, CircuitParams,
        c=sec.get_float("c"), l=sec.get_float("l"), r=r, v0=v0,
        kappa=sec.get_float("kappa", 0.0),
    )

    sec = sections["laser"]
    laser = _build(
        sec, LaserParams,
        gamma_m=sec.get_float("gamma_m"), gamma_l=sec.get_float("gamma_l"),
        gamma_nr=sec.get_float("gamma_nr"), n0=sec.get_float("n0"),
        tau_p=sec.get_float("tau_p"), eta=sec.get_float("eta"),
        r0=sec.get_float("r0"), q_e=sec.get_float("q_e", 1.602176634e-19),
    )

    if "sim" in sections:
        sec = sections["sim"]
        sim = _build(
            sec, SimConfig,
            dt=sec.get_float("dt", 1e-13),
            duration=sec.get_float("duration", 3e-9),
            output_stride=sec.get_int("output_stride", 10),
            noise_enabled=sec.get_bool("noise", False),
            rng_seed=sec.get_int("seed", 0),
        )
    else:
        sim = SimConfig()

    upper, lower, channel = 0.5, 0.2, "v"
    if "detection" in sections:
        sec = sections["detection"]
        upper = sec.get_float("upper", 0.5)
        lower = sec.get_float("lower", 0.2)
        channel = sec.get_str("channel", "v")
        if not (0.0 < lower < upper < 1.0):
            raise InvariantViolationError("[detection] need 0 < lower < upper < 1")
        if channel not in ("v", "i", "s", "n"):
            raise InvariantViolationError(f"[detection] unknown channel {channel!r}")

    kind = out_dir = None
    if "experiment" in sections:
        sec = sections["experiment"]
        if sec.has("kind"):
            kind = sec.get_str("kind")
            if kind not in EXPERIMENT_KINDS:
                raise InvariantViolationError(
                    f"[experiment] unknown kind {kind!r}; expected one of {EXPERIMENT_KINDS}"
                )
        if sec.has("out_dir"):
            out_dir = sec.get_str("out_dir")

    threshold = None
    if "threshold" in sections:
        sec = sections["threshold"]
        amplitudes = sec.get_float_list("amplitudes")
        if list(amplitudes) != sorted(amplitudes):
            raise InvariantViolationError("[threshold] amplitudes must be sorted ascending")
        threshold = ThresholdSpec(amplitudes=amplitudes, pulse_width=sec.get_float("pulse_width"))
        if threshold.pulse_width <= 0:
            raise InvariantViolationError("[threshold] pulse_width must be positive")

    refractory = None
    if "refractory" in sections:
        sec = sections["refractory"]
        separations = sec.get_float_list("separations")
        if list(separations) != sorted(separations) or any(s < 0 for s in separations):
            raise InvariantViolationError(
                "[refractory] separations must be ascending and non-negative"
            )
        refractory = RefractorySpec(
            separations=separations,
            pulse_width=sec.get_float("pulse_width"),
            amplitude=sec.get_float("amplitude") if sec.has("amplitude") else None,
            amplitude_factor=sec.get_float("amplitude_factor", 2.0),
            seeds=sec.get_int("seeds", 20),
        )
        if refractory.pulse_width <= 0 or refractory.seeds < 1:
            raise InvariantViolationError("[refractory] pulse_width and seeds must be positive")

    and_spec = None
    if "and" in sections:
        sec = sections["and"]
        and_spec = AndSpec(
            deltas=sec.get_float_list("deltas"),
            pulse_width=sec.get_float("pulse_width"),
            amplitude=sec.get_float("amplitude") if sec.has("amplitude") else None,
        )
        if and_spec.pulse_width <= 0:
            raise InvariantViolationError("[and] pulse_width must be positive")

    xor_spec = None
    if "xor" in sections:
        sec = sections["xor"]
        xor_spec = XorSpec(
            pulse_width=sec.get_float("pulse_width"),
            amplitude=sec.get_float("amplitude") if sec.has("amplitude") else None,
        )
        if xor_spec.pulse_width <= 0:
            raise InvariantViolationError("[xor] pulse_width must be positive")

    branches = []
    for name in sorted(s for s in sections if s.startswith("branch.")):
        sec = sections[name]
        label = name.split(".", 1)[1]
        if not label:
            raise InvariantViolationError(f"branch section [{name}] has an empty label")
        branch = _build(
            sec, BranchSpec,
            label=label,
            kind=sec.get_str("kind", "square"),
            t0=sec.get_float("t0", 0.0),
            width=sec.get_float("width"),
            amplitude=sec.get_float("amplitude"),
            separation=sec.get_float("separation", 0.0),
            pulse_polarity=sec.get_int("pulse_polarity", 1),
            polarity=sec.get_int("polarity", 1),
            baseline=sec.get_float("baseline", 0.0),
        )
        branches.append(branch)
    labels = [b.label for b in branches]
    if len(set(labels)) != len(labels):
        raise InvariantViolationError(f"duplicate branch labels {labels!r}")

    return ExperimentConfig(
        iv=iv, circuit=circuit, laser=laser, sim=sim,
        detection_upper=upper, detection_lower=lower, detection_channel=channel,
        kind=kind, out_dir=out_dir,
        threshold=threshold, refractory=refractory,
        and_spec=and_spec, xor_spec=xor_spec,
        branches=tuple(branches),
    )


def load_config(path) -> ExperimentConfig:
    """Load and validate an experiment config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path!r}: {exc}") from exc
    return load_config_text(text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the key/value text form.

    The result parses to an equal ExperimentConfig (bias is written as the
    resolved v0, floats via repr so they round-trip exactly).
    """
    lines = []

    def section(name, pairs):
        lines.append(f"[{name}]")
        for key, value in pairs:
            if value is not None:
                lines.append(f"{key} = {_fmt(value)}")
        lines.append("")

    if cfg.kind or cfg.out_dir:
        section("experiment", [("kind", cfg.kind), ("out_dir", cfg.out_dir)])
    p = cfg.iv
    section("iv", [("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d),
                   ("n1", p.n1), ("n2", p.n2), ("h", p.h), ("vt", p.vt)])
    c = cfg.circuit
    section("circuit", [("c", c.c), ("l", c.l), ("r", c.r), ("v0", c.v0),
                        ("kappa", c.kappa)])
    lp = cfg.laser
    section("laser", [("gamma_m", lp.gamma_m), ("gamma_l", lp.gamma_l),
                      ("gamma_nr", lp.gamma_nr), ("n0", lp.n0),
                      ("tau_p", lp.tau_p), ("eta", lp.eta), ("r0", lp.r0),
                      ("q_e", lp.q_e)])
    s = cfg.sim
    section("sim", [("dt", s.dt), ("duration", s.duration),
                    ("output_stride", s.output_stride),
                    ("noise", s.noise_enabled), ("seed", s.rng_seed)])
    section("detection", [("upper", cfg.detection_upper),
                          ("lower", cfg.detection_lower),
                          ("channel", cfg.detection_channel)])
    if cfg.threshold:
        section("threshold", [
            ("amplitudes", ",".join(repr(a) for a in cfg.threshold.amplitudes)),
            ("pulse_width", cfg.threshold.pulse_width),
        ])
    if cfg.refractory:
        r = cfg.refractory
        section("refractory", [
            ("separations", ",".join(repr(x) for x in r.separations)),
            ("pulse_width", r.pulse_width),
            ("amplitude", r.amplitude),
            ("amplitude_factor", r.amplitude_factor),
            ("seeds", r.seeds),
        ])
    if cfg.and_spec:
        a = cfg.and_spec
        section("and", [
            ("deltas", ",".join(repr(x) for x in a.deltas)),
            ("pulse_width", a.pulse_width),
            ("amplitude", a.amplitude),
        ])
    if cfg.xor_spec:
        section("xor", [("pulse_width", cfg.xor_spec.pulse_width),
                        ("amplitude", cfg.xor_spec.amplitude)])
    for b in cfg.branches:
        section(f"branch.{b.label}", [
            ("kind", b.kind), ("t0", b.t0), ("width", b.width),
            ("amplitude", b.amplitude), ("separation", b.separation),
            ("pulse_polarity", b.pulse_polarity), ("polarity", b.polarity),
            ("baseline", b.baseline),
        ])
    return "\n".join(lines)


def preset_path(name: str):
    """Filesystem path of a bundled parameter preset (without .cfg suffix)."""
    ref = resources.files("rtdspike").joinpath("presets", f"{name}.cfg")
    if not ref.is_file():
        raise ConfigParseError(f"no bundled preset named {name!r}")
    return ref


def load_preset(name: str) -> ExperimentConfig:
    """Load a bundled preset such as 'nanoscale-default'."""
    return load_config_text(preset_path(name).read_text(encoding="utf-8"))
