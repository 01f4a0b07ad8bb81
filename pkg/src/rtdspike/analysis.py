"""Spike detection and characterization protocols (threshold, refractoriness).

Detection is a Schmitt trigger on the deviation of one trace channel from
its quiescent baseline: an excursion opens when |x - baseline| exceeds
``upper * a_ref`` and closes at the first point where the deviation drops
below ``lower * a_ref`` and stays below the upper band for ``hold_time``.
The hold keeps the zero-crossing between a spike's overshoot and its
undershoot from splitting one excursion into two; a final dead-time pass
merges any residual close pairs.  ``a_ref`` is the full-spike amplitude
measured once per parameter set from a canonical super-threshold pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import SimConfig, System, Trace, integrate, quiescent_point
from .errors import SubThresholdPulseError
from .stimulus import Stimulus, doublet, square_pulse

__all__ = [
    "DetectionConfig",
    "SpikeEvent",
    "SpikeTrain",
    "ThresholdReport",
    "RefractoryReport",
    "calibrate_detection",
    "detect_spikes",
    "find_threshold",
    "threshold_sweep",
    "refractory_sweep",
    "temporal_map",
    "derive_trial_seed",
]

_SATURATION_RATIO = 1.1   # response growth below this marks the all-or-nothing regime
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class DetectionConfig:
    """Calibrated Schmitt-trigger settings for one parameter set and channel."""

    a_ref: float
    baseline: float
    upper: float = 0.5
    lower: float = 0.2
    channel: str = "v"
    hold_time: float = 0.0
    dead_time: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.lower < self.upper < 1.0):
            raise ValueError(
                f"need 0 < lower < upper < 1, got lower={self.lower}, upper={self.upper}"
            )
        if not (self.a_ref > 0) or not math.isfinite(self.a_ref):
            raise ValueError("a_ref must be positive and finite")
        if self.hold_time < 0 or self.dead_time < 0:
            raise ValueError("hold_time and dead_time must be >= 0")
        if self.channel not in ("v", "i", "s", "n"):
            raise ValueError(f"unknown detection channel {self.channel!r}")


@dataclass(frozen=True)
class SpikeEvent:
    """One detected excursion."""

    t_peak: float
    v_pp: float
    s_peak: float
    width: float
    t_start: float
    t_end: float


@dataclass(frozen=True)
class SpikeTrain:
    """Time-ordered detected events plus the detection settings used."""

    events: tuple[SpikeEvent, ...]
    detection: DetectionConfig

    def __post_init__(self):
        peaks = [e.t_peak for e in self.events]
        if any(b <= a for a, b in zip(peaks, peaks[1:])):
            raise ValueError("event peaks must be strictly increasing")
        if any(b - a < self.detection.dead_time for a, b in zip(peaks, peaks[1:])):
            raise ValueError("event peaks closer than the detector dead-time")

    def __len__(self):
        return len(self.events)


def _scan_excursions(dev: np.ndarray, hi: float, lo: float, n_hold: int):
    """Index windows [start, end] of Schmitt excursions with a hold on release.

    The excursion closes at the first sample where the deviation drops below
    ``lo`` and stays there for ``n_hold`` samples, so the brief baseline
    crossing between a spike's overshoot and undershoot does not end it.
    """
    windows = []
    n = dev.size
    k = 0
    while k < n:
        if dev[k] <= hi:
            k += 1
            continue
        start = k
        j = k
        while j < n:
            if dev[j] >= lo:
                j += 1
                continue
            q = j
            while q < n and q - j < n_hold and dev[q] < lo:
                q += 1
            if q == n or q - j >= n_hold:
                break
            j = q   # rose back above the release band during the hold: stay open
        windows.append((start, min(j, n - 1)))
        k = j + 1
    return windows


def _quadratic_peak(dev: np.ndarray, k: int, dt: float) -> float:
    if 0 < k < dev.size - 1:
        y0, y1, y2 = dev[k - 1], dev[k], dev[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            return (k + 0.5 * (y0 - y2) / denom) * dt
    return k * dt


def detect_spikes(trace: Trace, detection: DetectionConfig) -> SpikeTrain:
    """Extract spike events from a trace with a calibrated Schmitt trigger."""
    if len(trace) < 10:
        raise ValueError(f"trace too short for detection ({len(trace)} samples)")
    x = trace.channel(detection.channel)
    dev = np.abs(x - detection.baseline)
    hi = detection.upper * detection.a_ref
    lo = detection.lower * detection.a_ref
    n_hold = int(round(detection.hold_time / trace.dt))
    windows = _scan_excursions(dev, hi, lo, n_hold)

    merged: list[list[int]] = []
    dead = detection.dead_time
    for start, end in windows:
        k_peak = start + int(np.argmax(dev[start : end + 1]))
        if merged:
            prev = merged[-1]
            if (k_peak - prev[2]) * trace.dt < dead:
                prev[1] = end
                if dev[k_peak] > dev[prev[2]]:
                    prev[2] = k_peak
                continue
        merged.append([start, end, k_peak])

    events = []
    # v_pp always reports the voltage swing; on non-V channels the first
    # sample stands in for the voltage baseline (traces start at rest)
    v_base = detection.baseline if detection.channel == "v" else float(trace.v[0])
    for start, end, k_peak in merged:
        seg_v = trace.v[start : end + 1] - v_base
        seg_dev = dev[start : end + 1]
        half = 0.5 * seg_dev.max()
        # positive peak plus negative peak of the voltage excursion
        v_pp = max(float(seg_v.max()), 0.0) - min(float(seg_v.min()), 0.0)
        events.append(
            SpikeEvent(
                t_peak=float(_quadratic_peak(dev, k_peak, trace.dt)),
                v_pp=v_pp,
                s_peak=float(trace.s[start : end + 1].max()),
                width=float((seg_dev >= half).sum() * trace.dt),
                t_start=start * trace.dt,
                t_end=end * trace.dt,
            )
        )
    return SpikeTrain(events=tuple(events), detection=detection)


def _max_response(system: System, cfg: SimConfig, stim: Stimulus, channel: str,
                  baseline: float) -> tuple[float, Trace]:
    trace = integrate(stim, system.iv, system.circuit, system.laser, cfg)
    return float(np.max(np.abs(trace.channel(channel) - baseline))), trace


def calibrate_detection(
    system: System,
    cfg: SimConfig,
    channel: str = "v",
    upper: float = 0.5,
    lower: float = 0.2,
) -> DetectionConfig:
    """Measure the reference spike amplitude and build a detector for it.

    One canonical super-threshold pulse (found by amplitude doubling until
    the response saturates, the all-or-nothing signature) sets ``a_ref``.
    Hold and dead times default to 3x and 6x the circuit's sqrt(L*C) so the
    same fractions carry over to time-scaled parameter sets.
    """
    rest = quiescent_point(system.iv, system.circuit, system.laser)
    baseline = getattr(rest, channel)
    cal_cfg = replace(cfg, noise_enabled=False)
    width = math.sqrt(system.circuit.l * system.circuit.c)
    t0 = 0.25 * cal_cfg.duration

    amp = 1.0
    response, _ = _max_response(
        system, cal_cfg, square_pulse(t0, width, amp), channel, baseline
    )
    for _ in range(_MAX_DOUBLINGS):
        doubled, trace = _max_response(
            system, cal_cfg, square_pulse(t0, width, 2.0 * amp), channel, baseline
        )
        if response > 0 and doubled / response < _SATURATION_RATIO:
            tc = math.sqrt(system.circuit.l * system.circuit.c)
            return DetectionConfig(
                a_ref=doubled,
                baseline=baseline,
                upper=upper,
                lower=lower,
                channel=channel,
                hold_time=3.0 * tc,
                dead_time=6.0 * tc,
            )
        amp *= 2.0
        response = doubled
    raise SubThresholdPulseError(
        "calibration found no all-or-nothing response: amplitude doubling never saturated"
    )


def find_threshold(
    system: System,
    cfg: SimConfig,
    pulse_width: float,
    detection: DetectionConfig,
    t0: Optional[float] = None,
    iterations: int = 30,
) -> float:
    """Bisect the minimal square-pulse amplitude that elicits a spike."""
    cal_cfg = replace(cfg, noise_enabled=False)
    if t0 is None:
        t0 = 0.25 * cal_cfg.duration

    def fires(amplitude: float) -> bool:
        trace = integrate(
            square_pulse(t0, pulse_width, amplitude),
            system.iv, system.circuit, system.laser, cal_cfg,
        )
        return len(detect_spikes(trace, detection)) > 0

    hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if fires(hi):
            break
        hi *= 2.0
    else:
        raise SubThresholdPulseError("no spiking amplitude found while doubling")
    lo = 0.0 if hi == 1.0 else hi / 2.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ThresholdReport:
    """Per-amplitude spike counts and the inferred threshold."""

    amplitudes: tuple[float, ...]
    counts: tuple[int, ...]
    threshold: Optional[float]     # None when outside the swept range
    pulse_width: float


def threshold_sweep(
    amplitudes: Sequence[float],
    pulse_width: float,
    system: System,
    cfg: SimConfig,
    detection: Optional[DetectionConfig] = None,
    t0: Optional[float] = None,
) -> ThresholdReport:
    """Count spikes for each pulse amplitude and infer the threshold.

    The threshold is the midpoint between the largest zero-count amplitude
    and the smallest spiking amplitude; all-zero or all-spiking sweeps mark
    it as outside the swept range (None), which is not an error.
    """
    amplitudes = tuple(float(a) for a in amplitudes)
    if list(amplitudes) != sorted(amplitudes):
        raise ValueError("amplitudes must be sorted ascending")
    if detection is None:
        detection = calibrate_detection(system, cfg)
    if t0 is None:
        t0 = 0.25 * cfg.duration
    counts = []
    for amp in amplitudes:
        trace = integrate(
            square_pulse(t0, pulse_width, amp),
            system.iv, system.circuit, system.laser, cfg,
        )
        counts.append(len(detect_spikes(trace, detection)))
    threshold = None
    zeros = [a for a, c in zip(amplitudes, counts) if c == 0]
    firing = [a for a, c in zip(amplitudes, counts) if c >= 1]
    if zeros and firing and max(zeros) < min(firing):
        threshold = 0.5 * (max(zeros) + min(firing))
    return ThresholdReport(
        amplitudes=amplitudes,
        counts=tuple(counts),
        threshold=threshold,
        pulse_width=pulse_width,
    )


@dataclass(frozen=True)
class RefractoryReport:
    """Doublet-response counts per separation and the recovered t_ref."""

    separations: tuple[float, ...]
    spike_counts: tuple[tuple[int, ...], ...]   # per separation, per trial
    t_ref: Optional[float]
    pulse_width: float
    amplitude: float

    def __post_init__(self):
        for per_sep in self.spike_counts:
            for count in per_sep:
                if count not in (0, 1, 2):
                    raise ValueError(f"doublet trial produced {count} spikes")


def derive_trial_seed(base_seed: int, trial_index: int) -> int:
    """Deterministic per-trajectory seed from (base seed, trajectory index)."""
    return int(np.random.SeedSequence((base_seed, trial_index)).generate_state(1, np.uint64)[0])


def refractory_sweep(
    separations: Sequence[float],
    system: System,
    cfg: SimConfig,
    pulse_width: float,
    amplitude: float,
    seeds: int = 1,
    detection: Optional[DetectionConfig] = None,
    t0: Optional[float] = None,
) -> RefractoryReport:
    """Count spikes elicited by pulse doublets of increasing separation.

    t_ref is the smallest separation at which every trial produces two full
    spikes.  In stochastic mode each separation runs once per seed; the
    trial seeds derive deterministically from cfg.rng_seed.
    """
    separations = tuple(float(s) for s in separations)
    if list(separations) != sorted(separations):
        raise ValueError("separations must be sorted ascending")
    if detection is None:
        detection = calibrate_detection(system, cfg)
    if t0 is None:
        t0 = 0.25 * cfg.duration

    single = integrate(
        square_pulse(t0, pulse_width, amplitude),
        system.iv, system.circuit, system.laser, replace(cfg, noise_enabled=False),
    )
    if len(detect_spikes(single, detection)) == 0:
        raise SubThresholdPulseError(
            f"pulse sub-threshold: amplitude {amplitude:g} alone does not spike"
        )

    n_trials = seeds if cfg.noise_enabled else 1
    all_counts = []
    trial_index = 0
    for sep in separations:
        run_cfg = replace(cfg, duration=cfg.duration + sep)
        per_sep = []
        for _ in range(n_trials):
            if cfg.noise_enabled:
                run_cfg = replace(
                    run_cfg, rng_seed=derive_trial_seed(cfg.rng_seed, trial_index)
                )
            trial_index += 1
            trace = integrate(
                doublet(t0, pulse_width, amplitude, sep),
                system.iv, system.circuit, system.laser, run_cfg,
            )
            per_sep.append(len(detect_spikes(trace, detection)))
        all_counts.append(tuple(per_sep))

    t_ref = None
    for sep, per_sep in zip(separations, all_counts):
        if all(c == 2 for c in per_sep):
            t_ref = sep
            break
    return RefractoryReport(
        separations=separations,
        spike_counts=tuple(all_counts),
        t_ref=t_ref,
        pulse_width=pulse_width,
        amplitude=amplitude,
    )


def temporal_map(traces: Sequence[Trace], channel: str = "s") -> np.ndarray:
    """Stack one channel of repeated measurement cycles into a row-per-cycle matrix."""
    traces = list(traces)
    if not traces:
        raise ValueError("temporal_map requires at least one trace")
    length = len(traces[0])
    dt = traces[0].dt
    for tr in traces[1:]:
        if len(tr) != length or tr.dt != dt:
            raise ValueError("traces must share length and sample interval")
    return np.vstack([tr.channel(channel) for tr in traces])
