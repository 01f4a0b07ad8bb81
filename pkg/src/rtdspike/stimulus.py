"""Optical input waveform construction.

A stimulus is a baseline plus a list of rectangular segments (plain square
pulses or bipolar two-lobe pulses).  Branches carry a polarity so that two
anti-phase bipolar inputs cancel exactly when summed; the photodetector
clips the summed waveform at zero, never the individual branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

__all__ = [
    "Segment",
    "Stimulus",
    "Branch",
    "square_pulse",
    "doublet",
    "bipolar_pulse",
    "combine",
]

SQUARE = "square"
BIPOLAR = "bipolar"


@dataclass(frozen=True)
class Segment:
    """One rectangular building block on [t0, t0 + width)."""

    t0: float
    width: float
    amplitude: float
    shape: str = SQUARE
    polarity: int = 1

    def __post_init__(self):
        if self.width <= 0 or not math.isfinite(self.width):
            raise ValueError(f"segment width must be positive, got {self.width!r}")
        if not math.isfinite(self.amplitude) or not math.isfinite(self.t0):
            raise ValueError("segment t0/amplitude must be finite")
        if self.shape not in (SQUARE, BIPOLAR):
            raise ValueError(f"unknown segment shape {self.shape!r}")
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity!r}")


@dataclass(frozen=True)
class Stimulus:
    """Photon-count waveform S0(t) = max(0, baseline + sum of segments)."""

    segments: tuple[Segment, ...] = ()
    baseline: float = 0.0

    def __post_init__(self):
        if self.baseline < 0 or not math.isfinite(self.baseline):
            raise ValueError(f"baseline must be finite and >= 0, got {self.baseline!r}")

    def value(self, t: float) -> float:
        """Clipped waveform value at one time point."""
        total = self.baseline
        for seg in self.segments:
            total += _segment_value(seg, t)
        return total if total > 0.0 else 0.0

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Clipped waveform on a time grid (vectorized)."""
        times = np.asarray(times, dtype=float)
        total = np.full(times.shape, self.baseline)
        for seg in self.segments:
            amp = seg.amplitude * seg.polarity
            if seg.shape == SQUARE:
                total += amp * ((times >= seg.t0) & (times < seg.t0 + seg.width))
            else:
                half = 0.5 * seg.width
                total += amp * ((times >= seg.t0) & (times < seg.t0 + half))
                total -= amp * ((times >= seg.t0 + half) & (times < seg.t0 + seg.width))
        return np.maximum(total, 0.0)

    def shifted(self, offset: float) -> "Stimulus":
        """Copy with every segment start moved by ``offset``."""
        return Stimulus(
            tuple(replace(s, t0=s.t0 + offset) for s in self.segments), self.baseline
        )


def _segment_value(seg: Segment, t: float) -> float:
    if t < seg.t0 or t >= seg.t0 + seg.width:
        return 0.0
    amp = seg.amplitude * seg.polarity
    if seg.shape == SQUARE:
        return amp
    return amp if t < seg.t0 + 0.5 * seg.width else -amp


@dataclass(frozen=True)
class Branch:
    """One optical input with its modulator polarity."""

    label: str
    stimulus: Stimulus
    polarity: int = 1

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValueError(f"branch polarity must be +1 or -1, got {self.polarity!r}")


def square_pulse(t0: float, width: float, amplitude: float, baseline: float = 0.0) -> Stimulus:
    """Single square pulse of given amplitude on [t0, t0 + width)."""
    if width <= 0:
        raise ValueError(f"pulse width must be positive, got {width!r}")
    return Stimulus((Segment(t0, width, amplitude),), baseline)


def doublet(t0: float, width: float, amplitude: float, separation: float) -> Stimulus:
    """Two identical square pulses, rising edges ``separation`` apart.

    Overlapping supports add; separation 0 therefore doubles the amplitude.
    """
    if separation < 0:
        raise ValueError(f"separation must be >= 0, got {separation!r}")
    return Stimulus(
        (Segment(t0, width, amplitude), Segment(t0 + separation, width, amplitude))
    )


def bipolar_pulse(t0: float, width: float, amplitude: float, polarity: int = 1) -> Stimulus:
    """Positive lobe then equal-area negative lobe (inverted for polarity -1)."""
    return Stimulus((Segment(t0, width, amplitude, shape=BIPOLAR, polarity=polarity),))


def combine(branches: Iterable[Branch]) -> Stimulus:
    """Pointwise sum of branch waveforms, each scaled by its branch polarity.

    Models incoherent power summation on the photodetector; the summed
    waveform (not the individual branches) is clipped at zero on evaluation.
    """
    branches = list(branches)
    if not branches:
        raise ValueError("combine requires at least one branch")
    labels = [b.label for b in branches]
    if len(set(labels)) != len(labels):
        raise ValueError(f"branch labels must be unique, got {labels!r}")
    segments: list[Segment] = []
    baseline = 0.0
    for br in branches:
        baseline += br.polarity * br.stimulus.baseline
        for seg in br.stimulus.segments:
            segments.append(replace(seg, polarity=seg.polarity * br.polarity))
    if baseline < 0:
        raise ValueError(f"negative net baseline {baseline!r} after branch summation")
    segments.sort(key=lambda s: s.t0)
    return Stimulus(tuple(segments), baseline)
