"""Command-line entry point and experiment orchestration.

One subcommand per experiment kind; every run writes its artifacts (trace
CSVs, JSON reports) plus a plain-text manifest listing each output file
with its content hash.  Exit codes: 0 success, 1 truth-table failure,
2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    calibrate_detection,
    detect_spikes,
    find_threshold,
    refractory_sweep,
    threshold_sweep,
)
from .config import (
    EXPERIMENT_KINDS,
    BranchSpec,
    ExperimentConfig,
    load_config,
    load_preset,
    serialize_config,
)
from .dynamics import Trace, convergence_check, integrate
from .errors import ConfigError, RtdSpikeError
from .iv import analyze_iv, schulman_current_grid
from .stimulus import Branch, Stimulus, bipolar_pulse, doublet, square_pulse, combine
from .tasks import and_task, xor_task

EXIT_OK = 0
EXIT_TASK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_IV_SCAN_RANGE = (0.0, 3.0)
_IV_SCAN_RESOLUTION = 12001


def _write_trace_csv(path: Path, trace: Trace):
    data = np.column_stack([trace.t, trace.v, trace.i, trace.s, trace.n, trace.s0])
    np.savetxt(path, data, delimiter=",", header="t,V,I,S,N,S0", comments="", fmt="%.17g")


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _events_payload(train):
    return [
        {
            "t_peak": e.t_peak,
            "v_pp": e.v_pp,
            "s_peak": e.s_peak,
            "width": e.width,
            "t_start": e.t_start,
            "t_end": e.t_end,
        }
        for e in train.events
    ]


def branch_stimulus(spec: BranchSpec) -> Stimulus:
    """Materialize one declared branch waveform."""
    if spec.kind == "square":
        stim = square_pulse(spec.t0, spec.width, spec.amplitude, baseline=spec.baseline)
    elif spec.kind == "doublet":
        stim = doublet(spec.t0, spec.width, spec.amplitude, spec.separation)
        if spec.baseline:
            stim = Stimulus(stim.segments, spec.baseline)
    else:
        stim = bipolar_pulse(spec.t0, spec.width, spec.amplitude, spec.pulse_polarity)
        if spec.baseline:
            stim = Stimulus(stim.segments, spec.baseline)
    return stim


def combined_stimulus(config: ExperimentConfig) -> Stimulus:
    """Sum of all declared branches; a silent waveform when none are declared."""
    if not config.branches:
        return Stimulus()
    return combine(
        Branch(spec.label, branch_stimulus(spec), spec.polarity)
        for spec in config.branches
    )


def _need(config: ExperimentConfig, attr: str, section: str):
    spec = getattr(config, attr)
    if spec is None:
        raise ConfigError(f"experiment kind {config.kind!r} requires a [{section}] section")
    return spec


def run_experiment(config: ExperimentConfig, out_dir=None, echo=print) -> int:
    """Run the configured experiment, write artifacts + manifest, return exit code."""
    if config.kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"config has no valid experiment kind (got {config.kind!r})")
    out = Path(out_dir or config.out_dir or f"runs/{config.kind}")
    out.mkdir(parents=True, exist_ok=True)
    system = config.system
    written: list[Path] = []
    status = EXIT_OK

    def emit_trace(name: str, trace: Trace):
        path = out / name
        _write_trace_csv(path, trace)
        written.append(path)

    def emit_json(name: str, payload):
        path = out / name
        _write_json(path, payload)
        written.append(path)

    def detection():
        return calibrate_detection(
            system, config.sim,
            channel=config.detection_channel,
            upper=config.detection_upper,
            lower=config.detection_lower,
        )

    if config.kind == "iv":
        volts = np.linspace(0.0, 1.0, 1001)   # 1 mV steps
        currents = schulman_current_grid(volts, config.iv)
        path = out / "iv_curve.csv"
        np.savetxt(path, np.column_stack([volts, currents]), delimiter=",",
                   header="V,I", comments="", fmt="%.17g")
        written.append(path)
        meta = analyze_iv(config.iv, _IV_SCAN_RANGE, _IV_SCAN_RESOLUTION)
        emit_json("iv_metadata.json", {
            "v_peak": meta.v_peak, "i_peak": meta.i_peak,
            "v_valley": meta.v_valley, "i_valley": meta.i_valley,
            "pvcr": meta.pvcr, "ndc_lo": meta.ndc_lo, "ndc_hi": meta.ndc_hi,
        })
        echo(f"iv: NDC [{meta.ndc_lo * 1e3:.1f}, {meta.ndc_hi * 1e3:.1f}] mV, "
             f"PVCR {meta.pvcr:.2f}")

    elif config.kind == "simulate":
        det = detection()
        trace = integrate(combined_stimulus(config), system.iv, system.circuit,
                          system.laser, config.sim)
        train = detect_spikes(trace, det)
        emit_trace("trace.csv", trace)
        emit_json("spikes.json", {
            "n_events": len(train),
            "events": _events_payload(train),
            "a_ref": det.a_ref,
            "baseline": det.baseline,
            "channel": det.channel,
        })
        echo(f"simulate: {len(train)} spike(s) detected")

    elif config.kind == "threshold":
        spec = _need(config, "threshold", "threshold")
        det = detection()
        report = threshold_sweep(spec.amplitudes, spec.pulse_width, system,
                                 config.sim, det)
        emit_json("threshold.json", {
            "amplitudes": list(report.amplitudes),
            "counts": list(report.counts),
            "threshold": report.threshold,
            "threshold_in_range": report.threshold is not None,
            "pulse_width": report.pulse_width,
        })
        shown = "outside swept range" if report.threshold is None else f"{report.threshold:.1f}"
        echo(f"threshold: {shown} (counts {list(report.counts)})")

    elif config.kind == "refractory":
        spec = _need(config, "refractory", "refractory")
        det = detection()
        amplitude = spec.amplitude
        if amplitude is None:
            amplitude = spec.amplitude_factor * find_threshold(
                system, config.sim, spec.pulse_width, det)
        report = refractory_sweep(
            spec.separations, system, config.sim, spec.pulse_width, amplitude,
            seeds=spec.seeds, detection=det)
        emit_json("refractory.json", {
            "separations": list(report.separations),
            "spike_counts": [list(c) for c in report.spike_counts],
            "t_ref": report.t_ref,
            "pulse_width": report.pulse_width,
            "amplitude": report.amplitude,
            "seeds": spec.seeds if config.sim.noise_enabled else 1,
        })
        if config.sim.noise_enabled:
            matrix = _refractory_temporal_map(config, spec, amplitude)
            path = out / "temporal_map.csv"
            np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
            written.append(path)
        echo(f"refractory: t_ref = {report.t_ref}")

    elif config.kind == "and":
        spec = _need(config, "and_spec", "and")
        det = detection()
        results = and_task(spec.deltas, spec.pulse_width, spec.amplitude,
                           system, config.sim, det)
        cases = []
        for idx, res in enumerate(results):
            name = f"trace_and_{idx}.csv"
            emit_trace(name, res.trace)
            cases.append({
                "label": res.label,
                "spike_count": res.spike_count,
                "expected_count": res.expected_count,
                "passed": res.passed,
                "trace_file": name,
            })
        all_passed = all(r.passed for r in results)
        emit_json("and_summary.json", {"cases": cases, "passed": all_passed})
        echo("and: " + ", ".join(f"{r.label}->{r.spike_count}" for r in results))
        if not all_passed:
            status = EXIT_TASK_FAILED

    elif config.kind == "xor":
        spec = _need(config, "xor_spec", "xor")
        det = detection()
        results = xor_task(spec.pulse_width, spec.amplitude, system, config.sim,
                           detection=det)
        cases = []
        for res in results:
            name = f"trace_xor_{res.label}.csv"
            emit_trace(name, res.trace)
            cases.append({
                "label": res.label,
                "spike_count": res.spike_count,
                "expected_count": res.expected_count,
                "passed": res.passed,
                "trace_file": name,
            })
        all_passed = all(r.passed for r in results)
        emit_json("xor_summary.json", {"cases": cases, "passed": all_passed})
        echo("xor: " + ", ".join(f"{r.label}->{r.spike_count}" for r in results))
        if not all_passed:
            status = EXIT_TASK_FAILED

    elif config.kind == "convergence":
        if config.branches:
            stim = combined_stimulus(config)
        else:
            det = detection()
            width = (system.circuit.l * system.circuit.c) ** 0.5
            amplitude = 2.0 * find_threshold(system, config.sim, width, det)
            stim = square_pulse(0.25 * config.sim.duration, width, amplitude)
        report = convergence_check(stim, system.iv, system.circuit, system.laser,
                                   config.sim)
        emit_json("convergence.json", {
            "dt_coarse": report.dt_coarse,
            "dt_fine": report.dt_fine,
            "max_deviation": report.max_deviation,
            "peak_time_shift": report.peak_time_shift,
            "vpp_relative_change": report.vpp_relative_change,
        })
        echo("convergence: " + report.summary())

    _write_manifest(out, config, written)
    return status


def _refractory_temporal_map(config: ExperimentConfig, spec, amplitude):
    """Row-per-cycle photon-channel map of the full doublet-separation sequence.

    One long stimulus carries every doublet in its own slot; each cycle (seed)
    integrates the whole sequence once, so the rows line up sample-for-sample.
    """
    from dataclasses import replace as _replace

    from .analysis import derive_trial_seed, temporal_map
    from .stimulus import Segment, Stimulus

    t0 = 0.25 * config.sim.duration
    slot = config.sim.duration + max(spec.separations)
    segments = []
    for k, sep in enumerate(spec.separations):
        start = t0 + k * slot
        segments.append(Segment(start, spec.pulse_width, amplitude))
        segments.append(Segment(start + sep, spec.pulse_width, amplitude))
    sequence = Stimulus(tuple(segments))
    total = slot * len(spec.separations)
    traces = []
    for trial in range(spec.seeds):
        cfg = _replace(config.sim, duration=total,
                       rng_seed=derive_trial_seed(config.sim.rng_seed, trial))
        traces.append(integrate(sequence, config.iv, config.circuit,
                                config.laser, cfg))
    return temporal_map(traces, channel="s")


def export_stimulus(config: ExperimentConfig, out_dir=None, echo=print) -> int:
    """Sample the declared branch waveform onto the output grid and write CSV."""
    out = Path(out_dir or config.out_dir or "runs/stimulus")
    out.mkdir(parents=True, exist_ok=True)
    stim = combined_stimulus(config)
    dt = config.sim.dt * config.sim.output_stride
    times = np.arange(int(round(config.sim.duration / dt)) + 1) * dt
    values = stim.sample(times)
    path = out / "stimulus.csv"
    np.savetxt(path, np.column_stack([times, values]), delimiter=",",
               header="t,S0", comments="", fmt="%.17g")
    _write_manifest(out, config, [path])
    echo(f"stimulus: wrote {len(times)} samples")
    return EXIT_OK


def _write_manifest(out: Path, config: ExperimentConfig, files: list[Path]):
    config_hash = hashlib.sha256(serialize_config(config).encode()).hexdigest()
    lines = [
        f"tool_version = {__version__}",
        f"kind = {config.kind or 'stimulus'}",
        f"seed = {config.sim.rng_seed}",
        f"config_sha256 = {config_hash}",
        "",
    ]
    for path in sorted(files):
        lines.append(f"{_sha256(path)}  {path.name}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtdspike",
        description="Excitable optoelectronic spiking-node simulator",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS + ("stimulus",):
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", default=None,
                       help="config file (default: bundled nanoscale-default preset)")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument("--dt", type=float, default=None, help="override the step (s)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            config = load_preset("nanoscale-default")
        else:
            config = load_config(args.config)
        try:
            sim = config.sim
            if args.seed is not None:
                sim = replace(sim, rng_seed=args.seed)
            if args.dt is not None:
                sim = replace(sim, dt=args.dt)
        except ValueError as exc:
            raise ConfigError(f"invalid override: {exc}") from exc
        config = replace(config, sim=sim)
        if args.kind == "stimulus":
            return export_stimulus(config, args.out_dir)
        config = replace(config, kind=args.kind)
        return run_experiment(config, args.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RtdSpikeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
