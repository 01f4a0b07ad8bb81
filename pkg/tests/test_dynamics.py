"""Fixed points, single steps, integration contracts, scaling."""

from dataclasses import replace

import numpy as np
import pytest

import rtdspike as rs


class TestQuiescentPoint:
    def test_zero_bias_rests_at_origin(self, nano_config):
        cp = replace(nano_config.circuit, v0=0.0, kappa=0.0)
        rest = rs.quiescent_point(nano_config.iv, cp, nano_config.laser)
        assert abs(rest.v) < 1e-12
        assert abs(rest.i) < 1e-12
        assert rest.s == 0.0 and rest.n == 0.0   # pump-free floor

    def test_rest_state_is_integrator_fixed_point(self, nano_config, quiescent):
        cfg = replace(nano_config.sim, duration=10e-9, output_stride=100)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        assert np.max(np.abs(trace.v - quiescent.v)) < 1e-6
        assert np.max(np.abs(trace.s - quiescent.s)) / quiescent.s < 1e-6
        assert np.max(np.abs(trace.n - quiescent.n)) / quiescent.n < 1e-6

    def test_rate_equation_residuals_vanish_at_rest(self, nano_config, quiescent):
        lp = nano_config.laser
        pump = lp.eta * quiescent.v / (lp.q_e * lp.r0)
        gain = lp.gamma_m * (quiescent.n - lp.n0)
        ds = (gain - 1.0 / lp.tau_p) * quiescent.s + lp.gamma_m * quiescent.n
        dn = pump - (lp.gamma_l + lp.gamma_m + lp.gamma_nr) * quiescent.n - gain * quiescent.s
        assert abs(ds) / (quiescent.s / lp.tau_p) < 1e-10
        assert abs(dn) / pump < 1e-10

    def test_bias_inside_ndc_rejected(self, nano_config, nano_meta):
        v_mid = 0.5 * (nano_meta.ndc_lo + nano_meta.ndc_hi)
        v0_bad = v_mid + nano_config.circuit.r * rs.schulman_current(v_mid, nano_config.iv)
        cp = replace(nano_config.circuit, v0=v0_bad)
        # oracle: brute-force scan shows no load-line root below the NDC onset
        vs = np.linspace(-0.05, nano_meta.ndc_lo, 5000)
        mismatch = v0_bad - vs - cp.r * np.array(
            [rs.schulman_current(v, nano_config.iv) for v in vs]
        )
        assert np.all(mismatch > 0)
        with pytest.raises(rs.BiasBeyondPeakError):
            rs.quiescent_point(nano_config.iv, cp, nano_config.laser)

    def test_rest_sits_near_but_below_ndc_onset(self, quiescent, nano_meta):
        assert quiescent.v == pytest.approx(0.98 * nano_meta.ndc_lo, rel=1e-9)
        assert quiescent.v < nano_meta.ndc_lo

    def test_bias_five_millivolt_below_onset_is_still_stationary(
        self, nano_config, nano_meta
    ):
        # park the rest point 5 mV under the NDC onset and hold for 10 ns
        v_star = nano_meta.ndc_lo - 5e-3
        v0 = v_star + nano_config.circuit.r * rs.schulman_current(v_star, nano_config.iv)
        cp = replace(nano_config.circuit, v0=v0)
        rest = rs.quiescent_point(nano_config.iv, cp, nano_config.laser)
        assert rest.v == pytest.approx(v_star, abs=1e-9)
        cfg = replace(nano_config.sim, duration=10e-9, output_stride=100)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, cp, nano_config.laser,
                             replace(cfg, initial_state=rest))
        assert np.max(np.abs(trace.v - rest.v)) < 1e-6


class TestStep:
    def test_origin_is_fixed_point_without_bias(self, nano_config):
        cp = replace(nano_config.circuit, v0=0.0)
        zero = rs.State(v=0.0, i=0.0, s=0.0, n=0.0)
        out = rs.step(zero, 0.0, nano_config.iv, cp, nano_config.laser, 1e-13)
        assert (out.v, out.i, out.s, out.n) == (0.0, 0.0, 0.0, 0.0)

    def test_quiescent_state_nearly_unchanged(self, nano_config, quiescent):
        out = rs.step(quiescent, 0.0, nano_config.iv, nano_config.circuit,
                      nano_config.laser, 1e-13)
        assert out.v == pytest.approx(quiescent.v, rel=1e-12)
        assert out.i == pytest.approx(quiescent.i, rel=1e-12)
        assert out.s == pytest.approx(quiescent.s, rel=1e-12)
        assert out.n == pytest.approx(quiescent.n, rel=1e-12)

    def test_step_chain_matches_integrate_bitwise(self, nano_config, quiescent):
        stim = rs.square_pulse(1e-12, 20e-12, 8000.0)
        cfg = replace(nano_config.sim, duration=60 * 1e-13, output_stride=1)
        trace = rs.integrate(stim, nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        state = quiescent
        for k in range(60):
            assert state.v == trace.v[k] and state.i == trace.i[k]
            assert state.s == trace.s[k] and state.n == trace.n[k]
            state = rs.step(state, stim.value(k * 1e-13), nano_config.iv,
                            nano_config.circuit, nano_config.laser, 1e-13)

    def test_invalid_dt_rejected(self, nano_config, quiescent):
        with pytest.raises(ValueError):
            rs.step(quiescent, 0.0, nano_config.iv, nano_config.circuit,
                    nano_config.laser, 0.0)

    def test_noisy_step_chain_matches_seeded_integrate(self, nano_config, quiescent):
        seed, n_steps = 31415, 50
        cfg = replace(nano_config.sim, duration=n_steps * 1e-13, output_stride=1,
                      noise_enabled=True, rng_seed=seed)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        draws = rng.standard_normal(n_steps)
        state = quiescent
        for k in range(n_steps):
            assert state.s == trace.s[k] and state.v == trace.v[k]
            state = rs.step(state, 0.0, nano_config.iv, nano_config.circuit,
                            nano_config.laser, 1e-13, noise=float(draws[k]))


class TestIntegrate:
    def test_super_threshold_pulse_swings_over_one_volt(self, canonical_spike_trace):
        vpp = canonical_spike_trace.v.max() - canonical_spike_trace.v.min()
        assert vpp > 1.0
        # excursion completes within a nanosecond of the pulse
        peak_idx = int(np.argmax(canonical_spike_trace.v))
        assert peak_idx * canonical_spike_trace.dt < 0.5e-9 + 1e-9

    def test_long_rest_run_stays_at_rest(self, nano_config, quiescent):
        cfg = replace(nano_config.sim, duration=100e-9, output_stride=200)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        assert np.max(np.abs(trace.v - quiescent.v)) < 1e-6

    def test_seeded_runs_reproduce_bitwise(self, nano_config):
        cfg = replace(nano_config.sim, noise_enabled=True, rng_seed=42, duration=1e-9)
        stim = rs.square_pulse(0.2e-9, 20e-12, 7000.0)
        args = (stim, nano_config.iv, nano_config.circuit, nano_config.laser, cfg)
        assert rs.integrate(*args) == rs.integrate(*args)

    def test_different_seeds_differ_in_photon_channel(self, nano_config):
        cfg = replace(nano_config.sim, noise_enabled=True, rng_seed=1, duration=1e-9)
        a = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                         nano_config.laser, cfg)
        b = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                         nano_config.laser, replace(cfg, rng_seed=2))
        assert not np.array_equal(a.s, b.s)
        assert np.array_equal(a.v, b.v)   # noise enters the laser only

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_photon_and_carrier_numbers_stay_non_negative(self, nano_config, seed):
        cfg = replace(nano_config.sim, noise_enabled=True, rng_seed=seed,
                      duration=1.5e-9, output_stride=1)
        stim = rs.square_pulse(0.3e-9, 20e-12, 8000.0)
        trace = rs.integrate(stim, nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        assert np.all(trace.s >= 0.0)
        assert np.all(trace.n >= 0.0)

    def test_blow_up_reports_variable_and_time(self, nano_config):
        # dt beyond L/R destabilises the explicit step
        bad_dt = 2.0 * nano_config.circuit.l / nano_config.circuit.r
        cfg = replace(nano_config.sim, dt=bad_dt, duration=bad_dt * 2000, output_stride=1)
        with pytest.raises(rs.IntegrationBlowUpError) as err:
            rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                         nano_config.laser, cfg)
        assert err.value.variable in ("V", "I", "S", "N")
        assert err.value.time > 0

    def test_custom_initial_state_is_honoured(self, nano_config, quiescent):
        kicked = rs.State(v=quiescent.v + 0.05, i=quiescent.i, s=quiescent.s,
                          n=quiescent.n)
        cfg = replace(nano_config.sim, duration=1e-10, output_stride=1,
                      initial_state=kicked)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        assert trace.v[0] == kicked.v

    def test_trace_sampling_contract(self, nano_config):
        cfg = replace(nano_config.sim, duration=1e-10, output_stride=7)
        trace = rs.integrate(rs.Stimulus(), nano_config.iv, nano_config.circuit,
                             nano_config.laser, cfg)
        n_steps = round(cfg.duration / cfg.dt)
        assert len(trace) == n_steps // 7 + 1
        assert trace.dt == pytest.approx(7e-13)
        assert len(trace.s0) == len(trace)


class TestScaling:
    def test_time_scaled_system_replays_trajectory(self, nano_config, threshold_for):
        scale = 1e3
        amp = 1.8 * threshold_for(20e-12)
        fast_cfg = replace(nano_config.sim, duration=2e-9)
        slow_cfg = replace(nano_config.sim, dt=nano_config.sim.dt * scale,
                           duration=2e-9 * scale)
        fast = rs.integrate(rs.square_pulse(0.5e-9, 20e-12, amp),
                            nano_config.iv, nano_config.circuit,
                            nano_config.laser, fast_cfg)
        slow_circuit = nano_config.circuit.with_time_scale(scale)
        slow = rs.integrate(rs.square_pulse(0.5e-9 * scale, 20e-12 * scale, amp),
                            nano_config.iv, slow_circuit,
                            nano_config.laser, slow_cfg)
        # same dimensionless (V, I) samples up to one-sample stimulus-edge
        # rounding; 1% of the swing is the contract
        vpp = fast.v.max() - fast.v.min()
        assert np.max(np.abs(slow.v - fast.v)) < 0.01 * vpp
        assert np.max(np.abs(slow.i - fast.i)) < 0.01 * (fast.i.max() - fast.i.min())


class TestConvergence:
    def test_rest_run_deviation_is_roundoff(self, nano_config):
        cfg = replace(nano_config.sim, duration=0.5e-9)
        report = rs.convergence_check(rs.Stimulus(), nano_config.iv,
                                      nano_config.circuit, nano_config.laser, cfg)
        assert report.max_deviation["v"] < 1e-9
        assert report.peak_time_shift is None

    def test_requires_deterministic_mode(self, nano_config):
        cfg = replace(nano_config.sim, noise_enabled=True)
        with pytest.raises(ValueError):
            rs.convergence_check(rs.Stimulus(), nano_config.iv,
                                 nano_config.circuit, nano_config.laser, cfg)

    def test_absurd_step_blows_up(self, nano_config):
        bad_dt = 4.0 * nano_config.circuit.l / nano_config.circuit.r
        cfg = replace(nano_config.sim, dt=bad_dt, duration=bad_dt * 4000,
                      output_stride=1)
        with pytest.raises(rs.IntegrationBlowUpError):
            rs.convergence_check(rs.Stimulus(), nano_config.iv,
                                 nano_config.circuit, nano_config.laser, cfg)


class TestParams:
    def test_invalid_circuit_values_rejected(self):
        with pytest.raises(ValueError):
            rs.CircuitParams(c=0.0, l=1e-9, r=50.0, v0=0.6, kappa=0.0)
        with pytest.raises(ValueError):
            rs.CircuitParams(c=1e-15, l=1e-9, r=50.0, v0=float("inf"), kappa=0.0)
        with pytest.raises(ValueError):
            rs.CircuitParams(c=1e-15, l=1e-9, r=50.0, v0=0.6, kappa=-1.0)

    def test_invalid_laser_values_rejected(self):
        good = dict(gamma_m=1e6, gamma_l=1e9, gamma_nr=1e9, n0=1e5,
                    tau_p=1e-12, eta=0.2, r0=50.0)
        rs.LaserParams(**good)
        with pytest.raises(ValueError):
            rs.LaserParams(**{**good, "eta": 0.0})
        with pytest.raises(ValueError):
            rs.LaserParams(**{**good, "eta": 1.5})
        with pytest.raises(ValueError):
            rs.LaserParams(**{**good, "tau_p": 0.0})
        with pytest.raises(ValueError):
            rs.LaserParams(**{**good, "n0": -1.0})

    def test_state_rejects_negative_populations(self):
        with pytest.raises(ValueError):
            rs.State(v=0.0, i=0.0, s=-1.0, n=0.0)

    def test_sim_config_validation(self):
        with pytest.raises(ValueError):
            rs.SimConfig(dt=0.0)
        with pytest.raises(ValueError):
            rs.SimConfig(dt=1e-13, duration=1e-14)
        with pytest.raises(ValueError):
            rs.SimConfig(output_stride=0)
