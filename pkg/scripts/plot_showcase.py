#!/usr/bin/env python3
"""Render figures from a showcase run (see run_showcase.py).

Reads the CSV artifacts under runs/ and writes PNGs next to them:
the I-V curve with its NDC window, the single-spike electrical/optical
traces, the coincidence-task grid, and the stochastic temporal map.
"""

import json
import sys
from pathlib import Path

import numpy as np


def load_trace(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return {
        "t": data[:, 0], "v": data[:, 1], "i": data[:, 2],
        "s": data[:, 3], "n": data[:, 4], "s0": data[:, 5],
    }


def main(runs="runs"):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    runs = Path(runs)
    if not runs.exists():
        print(f"no {runs}/ directory; run scripts/run_showcase.py first")
        return 1

    iv_dir = runs / "iv"
    if (iv_dir / "iv_curve.csv").exists():
        curve = np.loadtxt(iv_dir / "iv_curve.csv", delimiter=",", skiprows=1)
        meta = json.loads((iv_dir / "iv_metadata.json").read_text())
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(curve[:, 0] * 1e3, curve[:, 1] * 1e3, lw=1.5)
        ax.axvspan(meta["ndc_lo"] * 1e3, meta["ndc_hi"] * 1e3, alpha=0.25,
                   color="orange", label="NDC")
        ax.set_xlabel("voltage (mV)")
        ax.set_ylabel("current (mA)")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(iv_dir / "iv_curve.png", dpi=150)
        plt.close(fig)
        print(f"wrote {iv_dir / 'iv_curve.png'}")

    sim_dir = runs / "simulate"
    if (sim_dir / "trace.csv").exists():
        tr = load_trace(sim_dir / "trace.csv")
        fig, axes = plt.subplots(3, 1, figsize=(6, 5), sharex=True)
        axes[0].plot(tr["t"] * 1e9, tr["s0"], lw=1, color="gray")
        axes[0].set_ylabel("input (counts)")
        axes[1].plot(tr["t"] * 1e9, tr["v"], lw=1)
        axes[1].set_ylabel("V (V)")
        axes[2].plot(tr["t"] * 1e9, tr["s"], lw=1, color="crimson")
        axes[2].set_ylabel("photons")
        axes[2].set_xlabel("time (ns)")
        fig.tight_layout()
        fig.savefig(sim_dir / "spike.png", dpi=150)
        plt.close(fig)
        print(f"wrote {sim_dir / 'spike.png'}")

    and_dir = runs / "and"
    if (and_dir / "and_summary.json").exists():
        summary = json.loads((and_dir / "and_summary.json").read_text())
        cases = summary["cases"]
        fig, axes = plt.subplots(len(cases), 1, figsize=(6, 1.8 * len(cases)),
                                 sharex=True)
        for ax, case in zip(np.atleast_1d(axes), cases):
            tr = load_trace(and_dir / case["trace_file"])
            ax.plot(tr["t"] * 1e9, tr["v"], lw=1)
            twin = ax.twinx()
            twin.plot(tr["t"] * 1e9, tr["s0"], lw=0.8, color="gray", alpha=0.6)
            twin.set_yticks([])
            ax.set_ylabel("V (V)")
            ax.set_title(f"{case['label']} -> {case['spike_count']} spike(s)",
                         fontsize=9)
        np.atleast_1d(axes)[-1].set_xlabel("time (ns)")
        fig.tight_layout()
        fig.savefig(and_dir / "coincidence.png", dpi=150)
        plt.close(fig)
        print(f"wrote {and_dir / 'coincidence.png'}")

    noisy_dir = runs / "refractory-noisy"
    if (noisy_dir / "temporal_map.csv").exists():
        matrix = np.loadtxt(noisy_dir / "temporal_map.csv", delimiter=",")
        fig, ax = plt.subplots(figsize=(7, 3))
        ax.imshow(matrix, aspect="auto", origin="lower", cmap="inferno",
                  interpolation="nearest")
        ax.set_xlabel("sample")
        ax.set_ylabel("cycle")
        fig.tight_layout()
        fig.savefig(noisy_dir / "temporal_map.png", dpi=150)
        plt.close(fig)
        print(f"wrote {noisy_dir / 'temporal_map.png'}")

    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
