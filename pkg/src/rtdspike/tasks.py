"""Packaged two-input spike-logic experiments: coincidence (AND) and XOR.

AND: each branch carries one square pulse at 0.7x the single-pulse
threshold, so a lone pulse stays quiet and only temporally overlapping
pulses sum past threshold.  XOR: both branches carry the same bipolar
pulse but with opposite branch polarity; either pulse alone spikes through
its positive lobe, simultaneous pulses cancel exactly before detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .analysis import DetectionConfig, calibrate_detection, detect_spikes, find_threshold
from .dynamics import SimConfig, System, Trace, integrate
from .errors import AmplitudeCalibrationError
from .stimulus import Branch, bipolar_pulse, combine, square_pulse

__all__ = ["TaskResult", "and_task", "xor_task", "AND_AMPLITUDE_FACTOR", "XOR_AMPLITUDE_FACTOR"]

AND_AMPLITUDE_FACTOR = 0.7   # per-branch amplitude as a fraction of the single-pulse threshold
XOR_AMPLITUDE_FACTOR = 2.0   # bipolar amplitude relative to the half-width pulse threshold


@dataclass(frozen=True)
class TaskResult:
    """Outcome of one truth-table case."""

    label: str
    spike_count: int
    expected_count: int
    passed: bool
    trace: Optional[Trace] = field(default=None, compare=False, repr=False)


def _simulate(system: System, cfg: SimConfig, stimulus) -> Trace:
    return integrate(stimulus, system.iv, system.circuit, system.laser, cfg)


def and_task(
    deltas: Sequence[float],
    pulse_width: float,
    amplitude: Optional[float],
    system: System,
    cfg: SimConfig,
    detection: Optional[DetectionConfig] = None,
    t0: Optional[float] = None,
) -> list[TaskResult]:
    """Coincidence detection over branch delays.

    ``amplitude=None`` calibrates the per-branch amplitude to 0.7x the
    single-pulse threshold.  Expected truth: a spike exactly when the two
    pulses overlap (|delta| < width), since only then does the summed input
    exceed threshold.
    """
    if detection is None:
        detection = calibrate_detection(system, cfg)
    if t0 is None:
        t0 = 0.25 * cfg.duration
    if amplitude is None:
        threshold = find_threshold(system, cfg, pulse_width, detection)
        amplitude = AND_AMPLITUDE_FACTOR * threshold

    lone = detect_spikes(
        _simulate(system, cfg, square_pulse(t0, pulse_width, amplitude)), detection
    )
    if len(lone) > 0:
        raise AmplitudeCalibrationError(
            f"amplitude miscalibrated: a single {amplitude:g}-count pulse spikes alone"
        )

    results = []
    for delta in deltas:
        run_cfg = replace(cfg, duration=cfg.duration + abs(delta))
        stim = combine([
            Branch("A", square_pulse(t0, pulse_width, amplitude)),
            Branch("B", square_pulse(t0 + delta, pulse_width, amplitude)),
        ])
        trace = _simulate(system, run_cfg, stim)
        count = len(detect_spikes(trace, detection))
        expected = 1 if abs(delta) < pulse_width else 0
        results.append(
            TaskResult(
                label=f"delta={delta:g}",
                spike_count=count,
                expected_count=expected,
                passed=count == expected,
                trace=trace,
            )
        )
    return results


XOR_CASES = ("00", "10", "01", "11")
_XOR_EXPECTED = {"00": 0, "10": 1, "01": 1, "11": 0}


def xor_task(
    pulse_width: float,
    amplitude: Optional[float],
    system: System,
    cfg: SimConfig,
    cases: Sequence[str] = XOR_CASES,
    detection: Optional[DetectionConfig] = None,
    t0: Optional[float] = None,
) -> list[TaskResult]:
    """Exclusive-OR truth table over two anti-phase bipolar inputs.

    After photodetector clipping a lone bipolar pulse acts through its
    positive lobe (width/2), so ``amplitude=None`` calibrates to 2x the
    threshold of a half-width square pulse.  The 11 case cancels exactly by
    construction (equal anti-phase rectangles), which is asserted before
    simulating.
    """
    unknown = [c for c in cases if c not in _XOR_EXPECTED]
    if unknown:
        raise ValueError(f"unknown XOR cases {unknown!r}")
    if detection is None:
        detection = calibrate_detection(system, cfg)
    if t0 is None:
        t0 = 0.25 * cfg.duration
    if amplitude is None:
        threshold = find_threshold(system, cfg, pulse_width / 2.0, detection)
        amplitude = XOR_AMPLITUDE_FACTOR * threshold

    pulse = bipolar_pulse(t0, pulse_width, amplitude)
    both = combine([Branch("A", pulse, polarity=1), Branch("B", pulse, polarity=-1)])
    probe = np.linspace(0.0, cfg.duration, 2048)
    residual = both.sample(probe)
    if np.any(residual != 0.0):
        raise AmplitudeCalibrationError(
            "anti-phase bipolar pulses do not cancel; branch pulses must be identical"
        )

    results = []
    for case in cases:
        branches = []
        if case[0] == "1":
            branches.append(Branch("A", pulse, polarity=1))
        if case[1] == "1":
            branches.append(Branch("B", pulse, polarity=-1))
        if branches:
            stim = combine(branches)
        else:
            stim = square_pulse(t0, pulse_width, 0.0)
        trace = _simulate(system, cfg, stim)
        count = len(detect_spikes(trace, detection))
        expected = _XOR_EXPECTED[case]
        results.append(
            TaskResult(
                label=case,
                spike_count=count,
                expected_count=expected,
                passed=count == expected,
                trace=trace,
            )
        )

    by_label = {r.label: r for r in results}
    for case in ("10", "01"):
        if case in by_label and by_label[case].spike_count == 0:
            raise AmplitudeCalibrationError(
                f"amplitude miscalibrated: case {case} fired no spike although its "
                "positive lobe must be super-threshold"
            )
    return results
