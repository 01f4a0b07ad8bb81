"""Tunnelling-curve model: anchors, brute-force slope oracle, properties."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import rtdspike as rs
from rtdspike.iv import schulman_conductance, schulman_current_grid

positive = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False)
small_voltage = st.floats(min_value=-0.5, max_value=0.5, allow_nan=False)


def random_params(a, b, c, d, n1, n2, h):
    return rs.SchulmanIV(a=a, b=b, c=c, d=d, n1=n1, n2=n2, h=h)


class TestCurrentFunction:
    def test_zero_voltage_is_exactly_zero(self, nano_config):
        assert rs.schulman_current(0.0, nano_config.iv) == 0.0

    @given(
        a=positive, b=small_voltage, c=small_voltage,
        d=st.floats(min_value=1e-4, max_value=0.1),
        n1=st.floats(min_value=1e-3, max_value=1.0),
        n2=st.floats(min_value=1e-3, max_value=1.0),
        h=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_zero_anchor_for_any_valid_params(self, a, b, c, d, n1, n2, h):
        p = random_params(a, b, c, d, n1, n2, h)
        assert rs.schulman_current(0.0, p) == 0.0

    def test_large_exponents_stay_finite(self, nano_config):
        p = nano_config.iv
        v_large = 700.0 * p.vt / p.n2   # leakage exponent ~700
        assert math.isfinite(rs.schulman_current(v_large, p))
        assert rs.schulman_current(v_large, p) > 0.0
        assert math.isfinite(rs.schulman_current(-v_large, p))

    def test_non_finite_voltage_rejected(self, nano_config):
        with pytest.raises(ValueError):
            rs.schulman_current(float("nan"), nano_config.iv)
        with pytest.raises(ValueError):
            rs.schulman_current(float("inf"), nano_config.iv)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            rs.SchulmanIV(a=0.0, b=0.1, c=0.1, d=0.01, n1=0.1, n2=0.1, h=0.0)
        with pytest.raises(ValueError):
            rs.SchulmanIV(a=1e-3, b=float("nan"), c=0.1, d=0.01, n1=0.1, n2=0.1, h=0.0)
        with pytest.raises(ValueError):
            rs.SchulmanIV(a=1e-3, b=0.1, c=0.1, d=0.01, n1=0.1, n2=0.1, h=-1e-6)

    def test_grid_matches_scalar(self, nano_config):
        p = nano_config.iv
        vs = np.linspace(-0.2, 1.4, 257)
        grid = schulman_current_grid(vs, p)
        scalar = np.array([rs.schulman_current(v, p) for v in vs])
        assert np.allclose(grid, scalar, rtol=1e-13, atol=1e-18)

    def test_analytic_conductance_matches_finite_difference(self, nano_config):
        p = nano_config.iv
        vs = np.linspace(0.01, 1.4, 101)
        eps = 1e-7
        fd = (schulman_current_grid(vs + eps, p) - schulman_current_grid(vs - eps, p)) / (2 * eps)
        assert np.allclose(schulman_conductance(vs, p), fd, rtol=1e-5, atol=1e-9)


class TestAnalyzeIV:
    def test_ndc_window_matches_calibration(self, nano_meta):
        assert 0.604 <= nano_meta.ndc_lo <= 0.614
        assert 0.715 <= nano_meta.ndc_hi <= 0.725
        assert nano_meta.v_peak < nano_meta.v_valley
        assert nano_meta.ndc_lo < nano_meta.ndc_hi
        assert nano_meta.pvcr > 1.0

    def test_conductance_near_zero_at_ndc_onset(self, nano_config):
        # 609 mV sits within a grid step of the refined peak
        assert abs(schulman_conductance(0.609, nano_config.iv)) < 1e-4

    def test_slope_sign_pattern_brute_force(self, nano_config, nano_meta):
        # independent oracle: finite-difference sign scan at 10^4 points
        p = nano_config.iv
        vs = np.linspace(0.0, 1.0, 10_000)
        f = schulman_current_grid(vs, p)
        df = np.diff(f)
        rising_before = vs[1:] <= nano_meta.ndc_lo - 1e-4
        falling_inside = (vs[:-1] >= nano_meta.ndc_lo + 1e-4) & (
            vs[1:] <= nano_meta.ndc_hi - 1e-4
        )
        rising_after = vs[:-1] >= nano_meta.ndc_hi + 1e-4
        assert np.all(df[rising_before] > 0)
        assert np.all(df[falling_inside] < 0)
        assert np.all(df[rising_after] > 0)

    def test_extrema_slopes_vanish(self, nano_config, nano_meta):
        p = nano_config.iv
        bound = 1e-6 * p.a   # per volt
        assert abs(schulman_conductance(nano_meta.v_peak, p)) < bound
        assert abs(schulman_conductance(nano_meta.v_valley, p)) < bound

    def test_slope_negative_across_interior(self, nano_config, nano_meta):
        p = nano_config.iv
        inner = np.linspace(nano_meta.ndc_lo, nano_meta.ndc_hi, 1002)[1:-1]
        assert np.all(schulman_conductance(inner, p) < 0.0)

    def test_monotone_curve_has_no_ndc(self):
        # resonance pushed to negative voltages: only the leakage upslope remains
        p = rs.SchulmanIV(a=1e-3, b=0.068, c=-0.5, d=0.01, n1=0.16, n2=0.03, h=1e-5)
        with pytest.raises(rs.NoNdcError):
            rs.analyze_iv(p)

    def test_bad_range_and_resolution_rejected(self, nano_config):
        with pytest.raises(ValueError):
            rs.analyze_iv(nano_config.iv, v_range=(1.0, 1.0))
        with pytest.raises(ValueError):
            rs.analyze_iv(nano_config.iv, resolution=100)

    def test_experimental_like_pvcr(self):
        cfg = rs.load_preset("experimental-like")
        meta = rs.analyze_iv(cfg.iv, v_range=(0.0, 3.0), resolution=12001)
        assert meta.pvcr == pytest.approx(8.5, rel=0.10)
        assert meta.ndc_lo == pytest.approx(0.90, abs=0.02)

    @given(scale=st.floats(min_value=1e-3, max_value=1e3))
    def test_pvcr_invariant_under_current_scaling(self, nano_config, scale):
        p = nano_config.iv
        scaled = rs.SchulmanIV(a=p.a * scale, b=p.b, c=p.c, d=p.d,
                               n1=p.n1, n2=p.n2, h=p.h * scale, vt=p.vt)
        base = rs.analyze_iv(p)
        result = rs.analyze_iv(scaled)
        assert result.v_peak == pytest.approx(base.v_peak, rel=1e-9)
        assert result.v_valley == pytest.approx(base.v_valley, rel=1e-9)
        assert result.ndc_lo == pytest.approx(base.ndc_lo, rel=1e-9)
        assert result.ndc_hi == pytest.approx(base.ndc_hi, rel=1e-9)
        assert result.pvcr == pytest.approx(base.pvcr, rel=1e-9)
        assert result.i_peak == pytest.approx(scale * base.i_peak, rel=1e-12)
        assert result.i_valley == pytest.approx(scale * base.i_valley, rel=1e-12)
