#!/usr/bin/env python3
"""Regenerate the bundled parameter fixtures from their calibration targets.

Stage 1 shapes the tunnelling curve: the leakage scale h pins the
valley/peak voltage ratio, the broadening d pins the peak-to-valley current
ratio, a joint rescale of (n1, n2) parks the NDC onset at the target
voltage, and a joint rescale of (a, h) sets the peak current.  Stage 2
aligns the photodetector conversion factor so the 60 ps single-pulse
threshold sits at 10/7 * 1000 photon counts (two coincident 1000-count
pulses then exceed threshold with the standard 1.4x margin while a lone
pulse stays quiet).

Prints config-ready blocks; paste into src/rtdspike/presets/*.cfg.
"""

import math
from dataclasses import replace

import rtdspike as rs

NANO_EDGES = (0.609, 0.720)
NANO_PEAK_CURRENT = 0.5e-3
NANO_PVCR = 3.5
EXP_PVCR = 8.5
EXP_ONSET = 0.90
EXP_PEAK_CURRENT = 3e-3
THRESHOLD_TARGET = 1000.0 / 0.7


def make_iv(p):
    return rs.SchulmanIV(**p)


def edges_of(p):
    try:
        meta = rs.analyze_iv(make_iv(p), v_range=(0.0, 4.0), resolution=16001)
    except rs.NoNdcError:
        return None
    return meta


def solve_h_for_ratio(p, target_ratio):
    lo, hi = 1e-12, 1e-1
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        meta = edges_of({**p, "h": mid})
        if meta is None or meta.v_valley / meta.v_peak > target_ratio:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def solve_h_for_pvcr(p, target):
    lo, hi = 1e-12, 1e-1
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        meta = edges_of({**p, "h": mid})
        if meta is None or meta.pvcr > target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def calibrate_nanoscale_iv():
    ratio = NANO_EDGES[1] / NANO_EDGES[0]
    p = dict(a=1e-3, b=0.068, c=0.1013, d=4e-3, n1=0.185, n2=0.035, h=1e-6)
    for _ in range(30):
        p["h"] = solve_h_for_ratio(p, ratio)
        meta = edges_of(p)
        p["d"] *= (meta.pvcr / NANO_PVCR) ** 0.3
    meta = edges_of(p)
    scale = meta.v_peak / NANO_EDGES[0]
    p["n1"] *= scale
    p["n2"] *= scale
    meta = edges_of(p)
    current_scale = NANO_PEAK_CURRENT / meta.i_peak
    p["a"] *= current_scale
    p["h"] *= current_scale
    return p


def calibrate_experimental_iv():
    p = dict(a=1e-3, b=0.068, c=0.1013, d=0.008, n1=0.185, n2=0.081, h=1e-5)
    p["h"] = solve_h_for_pvcr(p, EXP_PVCR)
    meta = edges_of(p)
    scale = meta.v_peak / EXP_ONSET
    p["n1"] *= scale
    p["n2"] *= scale
    meta = edges_of(p)
    current_scale = EXP_PEAK_CURRENT / meta.i_peak
    p["a"] *= current_scale
    p["h"] *= current_scale
    return p


def calibrate_kappa(iv_params):
    base = rs.load_preset("nanoscale-default")
    probe_kappa = 2e-7
    system = rs.System(
        iv=make_iv(iv_params),
        circuit=replace(
            base.circuit,
            v0=rs.bias_for_fraction(make_iv(iv_params), base.circuit.r),
            kappa=probe_kappa,
        ),
        laser=base.laser,
    )
    detection = rs.calibrate_detection(system, base.sim)
    threshold = rs.find_threshold(system, base.sim, 60e-12, detection)
    return probe_kappa * threshold / THRESHOLD_TARGET


def show(name, p, extra=""):
    print(f"--- {name} ---")
    for key in ("a", "b", "c", "d", "n1", "n2", "h"):
        print(f"{key} = {p[key]:.4g}")
    print(extra)


def main():
    nano = calibrate_nanoscale_iv()
    meta = edges_of(nano)
    show("nanoscale-default [iv]", nano,
         f"# NDC [{meta.ndc_lo * 1e3:.1f}, {meta.ndc_hi * 1e3:.1f}] mV, "
         f"PVCR {meta.pvcr:.3f}, I_peak {meta.i_peak * 1e3:.3f} mA")
    kappa = calibrate_kappa(nano)
    print(f"kappa = {kappa:.4g}\n")

    exp = calibrate_experimental_iv()
    meta = edges_of(exp)
    show("experimental-like [iv]", exp,
         f"# NDC onset {meta.ndc_lo * 1e3:.0f} mV, PVCR {meta.pvcr:.3f}, "
         f"I_peak {meta.i_peak * 1e3:.2f} mA")


if __name__ == "__main__":
    main()
