"""Shared fixtures; expensive calibrations run once per session."""

import time
from collections import namedtuple

import pytest
from hypothesis import settings

import rtdspike as rs

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

TimedRun = namedtuple("TimedRun", ["result", "seconds"])


@pytest.fixture(scope="session")
def nano_config():
    return rs.load_preset("nanoscale-default")


@pytest.fixture(scope="session")
def nano_system(nano_config):
    return nano_config.system


@pytest.fixture(scope="session")
def nano_sim(nano_config):
    return nano_config.sim


@pytest.fixture(scope="session")
def nano_meta(nano_config):
    return rs.analyze_iv(nano_config.iv)


@pytest.fixture(scope="session")
def detection_v(nano_system, nano_sim):
    return rs.calibrate_detection(nano_system, nano_sim, channel="v")


@pytest.fixture(scope="session")
def detection_s(nano_system, nano_sim):
    return rs.calibrate_detection(nano_system, nano_sim, channel="s")


@pytest.fixture(scope="session")
def threshold_for(nano_system, nano_sim, detection_v):
    """Memoized single-pulse threshold per pulse width."""
    cache = {}

    def lookup(width: float) -> float:
        if width not in cache:
            cache[width] = rs.find_threshold(nano_system, nano_sim, width, detection_v)
        return cache[width]

    return lookup


@pytest.fixture(scope="session")
def quiescent(nano_system):
    return nano_system.quiescent()


@pytest.fixture(scope="session")
def canonical_spike_trace(nano_config, threshold_for):
    """Deterministic 20 ps super-threshold pulse response."""
    amp = 1.8 * threshold_for(20e-12)
    stim = rs.square_pulse(0.5e-9, 20e-12, amp)
    return rs.integrate(stim, nano_config.iv, nano_config.circuit,
                        nano_config.laser, nano_config.sim)


@pytest.fixture(scope="session")
def refractory_run(nano_system, nano_sim, detection_v, threshold_for):
    """Deterministic doublet sweep, 100..500 ps in 50 ps steps, with runtime."""
    separations = [s * 1e-12 for s in range(100, 501, 50)]
    amplitude = 2.0 * threshold_for(20e-12)
    start = time.perf_counter()
    report = rs.refractory_sweep(
        separations, nano_system, nano_sim,
        pulse_width=20e-12, amplitude=amplitude, detection=detection_v,
    )
    return TimedRun(report, time.perf_counter() - start)


@pytest.fixture(scope="session")
def refractory_report(refractory_run):
    return refractory_run.result


@pytest.fixture(scope="session")
def and_run(nano_system, nano_sim, detection_v, threshold_for):
    deltas = [0.0, 30e-12, 90e-12, 150e-12]
    amplitude = 0.7 * threshold_for(60e-12)
    start = time.perf_counter()
    results = rs.and_task(deltas, 60e-12, amplitude, nano_system, nano_sim, detection_v)
    return TimedRun(results, time.perf_counter() - start)


@pytest.fixture(scope="session")
def and_results(and_run):
    return and_run.result


@pytest.fixture(scope="session")
def xor_run(nano_system, nano_sim, detection_v, threshold_for):
    amplitude = 2.0 * threshold_for(30e-12)
    start = time.perf_counter()
    results = rs.xor_task(60e-12, amplitude, nano_system, nano_sim,
                          detection=detection_v)
    return TimedRun(results, time.perf_counter() - start)


@pytest.fixture(scope="session")
def xor_results(xor_run):
    return xor_run.result
