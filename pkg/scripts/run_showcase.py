#!/usr/bin/env python3
"""Run the full experiment catalog on the bundled nanoscale fixture.

Writes one directory per experiment under runs/ (traces, reports,
manifests) covering: the I-V scan, a single-spike simulation, the
threshold staircase, the deterministic and stochastic refractory sweeps
(the latter with the 20-cycle temporal map), coincidence detection, XOR,
the step-halving convergence check, and a sampled stimulus export.
"""

import sys
from pathlib import Path

from rtdspike.cli import main as cli_main
from rtdspike.config import preset_path

RUNS = Path("runs")

EXPERIMENT_SECTIONS = """
[threshold]
amplitudes = 0, 1000, 2000, 2500, 3000, 3500, 4000, 5000, 6500
pulse_width = 2e-11

[refractory]
separations = 1e-10, 1.5e-10, 2e-10, 2.5e-10, 3e-10, 3.5e-10, 4e-10, 4.5e-10, 5e-10
pulse_width = 2e-11
seeds = 20

[and]
deltas = 0, 3e-11, 9e-11, 1.5e-10
pulse_width = 6e-11

[xor]
pulse_width = 6e-11

[branch.A]
kind = square
t0 = 5e-10
width = 2e-11
amplitude = 6500
"""


def main() -> int:
    RUNS.mkdir(exist_ok=True)
    preset = preset_path("nanoscale-default").read_text(encoding="utf-8")
    cfg = RUNS / "showcase.cfg"
    cfg.write_text(preset + EXPERIMENT_SECTIONS, encoding="utf-8")
    noisy_cfg = RUNS / "showcase-noisy.cfg"
    noisy_cfg.write_text(
        (preset + EXPERIMENT_SECTIONS).replace("noise = false", "noise = true"),
        encoding="utf-8",
    )

    plan = [
        ("iv", cfg),
        ("simulate", cfg),
        ("threshold", cfg),
        ("refractory", cfg),
        ("and", cfg),
        ("xor", cfg),
        ("convergence", cfg),
        ("stimulus", cfg),
        ("refractory-noisy", noisy_cfg),
    ]
    worst = 0
    for name, config in plan:
        kind = name.split("-")[0]
        out = RUNS / name
        print(f"=== {name} -> {out}")
        code = cli_main([kind, "--config", str(config), "--out-dir", str(out)])
        worst = max(worst, code)
    print(f"done; worst exit code {worst}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
