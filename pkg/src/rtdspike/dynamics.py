"""Coupled circuit/laser dynamics of the optoelectronic spiking node.

State (V, I, S, N) evolves under

    C dV/dt = I - f(V)
    L dI/dt = V0 + R*kappa*S0(t) - V - R*I
      dS/dt = (gm*(N - N0) - 1/tau_p)*S + gm*N + sqrt(gm*N*S)*xi(t)
      dN/dt = eta*V/(q_e*R0) - (gl + gm + gnr)*N - gm*(N - N0)*S

where f is the tunnelling nonlinearity, S0(t) the optical input in photon
counts, and xi unit-intensity white Gaussian noise (Ito convention).  The
integrator is fixed-step Euler-Maruyama; S and N are clamped at zero after
each step because an explicit step can overshoot below the lasing floor.
The stimulated-emission factor in the carrier equation is evaluated with
the photon number S itself.

The laser pair (S, N) is driven by V but does not feed back on the circuit
pair (V, I), so the electrical spike shape is set entirely by (f, C, L, R,
V0) and scaling both L and C by a common factor replays the same (V, I)
trajectory on a proportionally scaled time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import BiasBeyondPeakError, IntegrationBlowUpError, LaserSteadyStateError
from .iv import SchulmanIV, analyze_iv, schulman_current
from .stimulus import Stimulus

__all__ = [
    "CircuitParams",
    "LaserParams",
    "System",
    "State",
    "Trace",
    "SimConfig",
    "ConvergenceReport",
    "quiescent_point",
    "step",
    "integrate",
    "convergence_check",
    "bias_for_fraction",
]

_LASER_RESIDUAL_TOL = 1e-10
_LASER_MAX_ITERS = 500


@dataclass(frozen=True)
class CircuitParams:
    """Electrical constants: C (F), L (H), series R (ohm), bias V0 (V) and
    photodetector conversion kappa (A per photon count)."""

    c: float
    l: float
    r: float
    v0: float
    kappa: float

    def __post_init__(self):
        for name in ("c", "l", "r"):
            if not (getattr(self, name) > 0) or not math.isfinite(getattr(self, name)):
                raise ValueError(f"CircuitParams.{name} must be positive and finite")
        if not math.isfinite(self.v0):
            raise ValueError("CircuitParams.v0 must be finite")
        if self.kappa < 0 or not math.isfinite(self.kappa):
            raise ValueError("CircuitParams.kappa must be finite and >= 0")

    def with_time_scale(self, factor: float) -> "CircuitParams":
        """Scale L and C jointly; the (V, I) dynamics replay ``factor`` slower."""
        if factor <= 0:
            raise ValueError("time-scale factor must be positive")
        return replace(self, c=self.c * factor, l=self.l * factor)


@dataclass(frozen=True)
class LaserParams:
    """Rate-equation constants of the output laser.

    gamma_m: modal gain per carrier (1/s); gamma_l: carrier loss into other
    modes (1/s); gamma_nr: non-radiative recombination (1/s); n0:
    transparency carrier number; tau_p: photon lifetime (s); eta:
    voltage-to-pump coupling efficiency; r0: coupling load (ohm); q_e:
    elementary charge (C).
    """

    gamma_m: float
    gamma_l: float
    gamma_nr: float
    n0: float
    tau_p: float
    eta: float
    r0: float
    q_e: float = 1.602176634e-19

    def __post_init__(self):
        for name in ("gamma_m", "gamma_l", "gamma_nr", "tau_p", "r0", "q_e"):
            if not (getattr(self, name) > 0) or not math.isfinite(getattr(self, name)):
                raise ValueError(f"LaserParams.{name} must be positive and finite")
        if not (0 < self.eta <= 1):
            raise ValueError(f"LaserParams.eta must be in (0, 1], got {self.eta!r}")
        if self.n0 < 0 or not math.isfinite(self.n0):
            raise ValueError("LaserParams.n0 must be finite and >= 0")


@dataclass(frozen=True)
class System:
    """Bundle of one node's parameter set."""

    iv: SchulmanIV
    circuit: CircuitParams
    laser: LaserParams

    def quiescent(self) -> "State":
        return quiescent_point(self.iv, self.circuit, self.laser)

    def with_time_scale(self, factor: float) -> "System":
        return replace(self, circuit=self.circuit.with_time_scale(factor))


@dataclass(frozen=True)
class State:
    """Instantaneous node state: voltage, current, photon and carrier numbers."""

    v: float
    i: float
    s: float
    n: float
    t: float = 0.0

    def __post_init__(self):
        if self.s < 0 or self.n < 0:
            raise ValueError("photon and carrier numbers must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    """Integration settings; ``initial_state=None`` starts from the quiescent point."""

    dt: float = 1e-13
    duration: float = 3e-9
    output_stride: int = 10
    noise_enabled: bool = False
    rng_seed: int = 0
    initial_state: Optional[State] = None

    def __post_init__(self):
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise ValueError("SimConfig.dt must be positive and finite")
        if self.duration < self.dt:
            raise ValueError("SimConfig.duration must be >= dt")
        if self.output_stride < 1:
            raise ValueError("SimConfig.output_stride must be >= 1")

    def with_dt(self, dt: float, keep_grid: bool = True) -> "SimConfig":
        """Change the step while (optionally) preserving the output time grid."""
        if keep_grid:
            ratio = self.dt / dt
            stride = self.output_stride * ratio
            if abs(stride - round(stride)) > 1e-9:
                raise ValueError("new dt incompatible with the output grid")
            return replace(self, dt=dt, output_stride=int(round(stride)))
        return replace(self, dt=dt)


class Trace:
    """Uniformly sampled trajectory plus the applied stimulus samples."""

    __slots__ = ("dt", "v", "i", "s", "n", "s0")

    def __init__(self, dt, v, i, s, n, s0):
        arrays = [np.asarray(a, dtype=float) for a in (v, i, s, n, s0)]
        if any(a.ndim != 1 for a in arrays):
            raise ValueError("trace channels must be 1-D")
        length = arrays[0].size
        if length == 0:
            raise ValueError("trace must be non-empty")
        if any(a.size != length for a in arrays):
            raise ValueError("trace channels must share one length")
        if not (dt > 0):
            raise ValueError("trace dt must be positive")
        self.dt = float(dt)
        self.v, self.i, self.s, self.n, self.s0 = arrays

    def __len__(self):
        return self.v.size

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.dt == other.dt and all(
            np.array_equal(getattr(self, ch), getattr(other, ch))
            for ch in ("v", "i", "s", "n", "s0")
        )

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt

    def channel(self, name: str) -> np.ndarray:
        if name not in ("v", "i", "s", "n", "s0"):
            raise ValueError(f"unknown channel {name!r}")
        return getattr(self, name)

    def state_at(self, index: int) -> State:
        return State(
            v=float(self.v[index]),
            i=float(self.i[index]),
            s=float(self.s[index]),
            n=float(self.n[index]),
            t=index * self.dt,
        )


@lru_cache(maxsize=64)
def _cached_iv_metadata(iv: SchulmanIV):
    return analyze_iv(iv)


def bias_for_fraction(iv: SchulmanIV, r: float, fraction: float = 0.98) -> float:
    """Bias voltage V0 that rests the node at ``fraction`` * ndc_lo.

    The default 0.98 parks the quiescent point 2% below the NDC onset, on
    the stable branch just under the current peak.
    """
    if not (0 < fraction < 1):
        raise ValueError("bias fraction must be in (0, 1)")
    meta = _cached_iv_metadata(iv)
    v_star = fraction * meta.ndc_lo
    return v_star + r * schulman_current(v_star, iv)


def _laser_steady_state(v: float, lp: LaserParams) -> tuple[float, float]:
    """Zero-derivative (S, N) of the rate equations at fixed voltage.

    Eliminating the stimulated term between the two equations gives
    S = tau_p*(pump - (gl + gnr)*N), which reduces the problem to a
    quadratic in N; that root seeds a damped fixed-point iteration which
    is run to relative residual < 1e-10.
    """
    pump = lp.eta * v / (lp.q_e * lp.r0)
    if pump <= 0.0:
        # un-pumped floor; with clamping the integrator rests at (0, 0)
        return 0.0, 0.0
    gm, n0, tau_p = lp.gamma_m, lp.n0, lp.tau_p
    g_total = lp.gamma_l + lp.gamma_m + lp.gamma_nr
    g_other = lp.gamma_l + lp.gamma_nr

    qa = gm * tau_p * g_other
    qb = -(g_total + gm * tau_p * (pump + n0 * g_other))
    qc = pump * (1.0 + gm * tau_p * n0)
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        raise LaserSteadyStateError("no real steady state for the rate equations")
    n = (-qb - math.sqrt(disc)) / (2.0 * qa)
    s = tau_p * (pump - g_other * n)
    if -1e-9 * max(1.0, tau_p * pump) < s < 0.0:
        s = 0.0   # round-off at a marginally pumped operating point
    if s < 0 or n < 0:
        raise LaserSteadyStateError("steady state has negative photon/carrier number")

    def residual(s_val, n_val):
        ds = (gm * (n_val - n0) - 1.0 / tau_p) * s_val + gm * n_val
        dn = pump - g_total * n_val - gm * (n_val - n0) * s_val
        s_scale = max(abs(s_val) / tau_p, gm * abs(n_val), 1.0)
        return max(abs(ds) / s_scale, abs(dn) / max(pump, 1.0))

    beta = 0.5
    res = residual(s, n)
    for _ in range(_LASER_MAX_ITERS):
        if res < _LASER_RESIDUAL_TOL:
            return s, n
        s_next = tau_p * (pump - g_other * n)
        n_next = (pump + gm * n0 * s_next) / (g_total + gm * s_next)
        s_new = (1.0 - beta) * s + beta * max(s_next, 0.0)
        n_new = (1.0 - beta) * n + beta * max(n_next, 0.0)
        res_new = residual(s_new, n_new)
        if not math.isfinite(res_new):
            raise LaserSteadyStateError("laser fixed-point iteration diverged")
        if res_new > res:
            beta *= 0.5
            if beta < 1e-6:
                raise LaserSteadyStateError(
                    f"laser fixed-point iteration stalled at residual {res:.3e}"
                )
            continue
        s, n, res = s_new, n_new, res_new
    raise LaserSteadyStateError(
        f"laser fixed-point iteration did not reach residual {_LASER_RESIDUAL_TOL:g}"
    )


def quiescent_point(iv: SchulmanIV, cp: CircuitParams, lp: LaserParams) -> State:
    """DC fixed point of the full system on the stable branch below the peak.

    V* is the smallest root of V0 = V + R*f(V) with V* < ndc_lo; I* = f(V*);
    (S*, N*) solve the rate equations at V*.  Raises BiasBeyondPeakError when
    every load-line root sits at or beyond the NDC onset.
    """
    meta = _cached_iv_metadata(iv)

    def mismatch(v):
        return cp.v0 - v - cp.r * schulman_current(v, iv)

    lo = min(0.0, cp.v0) - 0.05
    grid = np.linspace(lo, meta.ndc_lo, 4001)
    values = np.array([mismatch(v) for v in grid])

    v_star = None
    exact = np.nonzero(values == 0.0)[0]
    if exact.size:
        v_star = float(grid[exact[0]])
    else:
        flips = np.nonzero(np.diff(np.sign(values)) != 0)[0]
        if flips.size:
            a, b = grid[flips[0]], grid[flips[0] + 1]
            for _ in range(60):
                mid = 0.5 * (a + b)
                if (mismatch(mid) > 0) == (values[flips[0]] > 0):
                    a = mid
                else:
                    b = mid
            v_star = 0.5 * (a + b)
    if v_star is None or v_star >= meta.ndc_lo:
        raise BiasBeyondPeakError(
            f"bias beyond peak: no load-line root below ndc_lo = {meta.ndc_lo:.4f} V "
            f"for V0 = {cp.v0:.4f} V"
        )
    v_star = float(v_star)
    i_star = schulman_current(v_star, iv)
    s_star, n_star = _laser_steady_state(v_star, lp)
    return State(v=v_star, i=i_star, s=s_star, n=n_star, t=0.0)


def step(
    state: State,
    s0_now: float,
    iv: SchulmanIV,
    cp: CircuitParams,
    lp: LaserParams,
    dt: float,
    noise: Optional[float] = None,
) -> State:
    """One Euler-Maruyama step; ``noise`` is the standard-normal draw xi."""
    if not (dt > 0):
        raise ValueError("dt must be positive")
    inv_c, inv_l, inv_tp = 1.0 / cp.c, 1.0 / cp.l, 1.0 / lp.tau_p
    g_total = lp.gamma_l + lp.gamma_m + lp.gamma_nr
    pump_coef = lp.eta / (lp.q_e * lp.r0)
    rk = cp.r * cp.kappa
    sqrt_dt = math.sqrt(dt)
    xi = 0.0 if noise is None else noise

    v, i, s, n = state.v, state.i, state.s, state.n
    fv = schulman_current(v, iv)
    gain = lp.gamma_m * (n - lp.n0)
    v_new = v + dt * (i - fv) * inv_c
    i_new = i + dt * (cp.v0 + rk * s0_now - v - cp.r * i) * inv_l
    s_new = s + dt * ((gain - inv_tp) * s + lp.gamma_m * n) + sqrt_dt * math.sqrt(
        max(lp.gamma_m * n * s, 0.0)
    ) * xi
    n_new = n + dt * (pump_coef * v - g_total * n - gain * s)
    if s_new < 0.0:
        s_new = 0.0
    if n_new < 0.0:
        n_new = 0.0

    t_new = state.t + dt
    for name, value in (("V", v_new), ("I", i_new), ("S", s_new), ("N", n_new)):
        if not math.isfinite(value):
            raise IntegrationBlowUpError(name, t_new)
    return State(v=v_new, i=i_new, s=s_new, n=n_new, t=t_new)


def integrate(
    stimulus: Stimulus,
    iv: SchulmanIV,
    cp: CircuitParams,
    lp: LaserParams,
    cfg: SimConfig,
) -> Trace:
    """Integrate the node over [0, duration], sampling every output_stride steps.

    Deterministic runs are bit-reproducible; stochastic runs are
    bit-reproducible for a fixed rng_seed.
    """
    n_steps = int(round(cfg.duration / cfg.dt))
    if n_steps < 1:
        raise ValueError("duration shorter than one step")
    initial = cfg.initial_state
    if initial is None:
        initial = quiescent_point(iv, cp, lp)

    times = np.arange(n_steps + 1) * cfg.dt
    drive = stimulus.sample(times)
    drive_steps = drive.tolist()   # plain floats keep the hot loop off numpy scalars

    if cfg.noise_enabled:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.rng_seed)))
        xi_steps = rng.standard_normal(n_steps).tolist()
    else:
        xi_steps = [0.0] * n_steps

    stride = cfg.output_stride
    n_out = n_steps // stride + 1
    out_v = np.empty(n_out)
    out_i = np.empty(n_out)
    out_s = np.empty(n_out)
    out_n = np.empty(n_out)
    out_idx = 0

    # hot loop: locals only, formulas identical to step()
    inv_c, inv_l, inv_tp = 1.0 / cp.c, 1.0 / cp.l, 1.0 / lp.tau_p
    gamma_m, n0 = lp.gamma_m, lp.n0
    g_total = lp.gamma_l + lp.gamma_m + lp.gamma_nr
    pump_coef = lp.eta / (lp.q_e * lp.r0)
    r, v0 = cp.r, cp.v0
    rk = cp.r * cp.kappa
    dt = cfg.dt
    sqrt_dt = math.sqrt(dt)
    sqrt = math.sqrt
    current = schulman_current
    # plain floats: caller-provided states may carry numpy scalars
    v, i, s, n = float(initial.v), float(initial.i), float(initial.s), float(initial.n)

    for k in range(n_steps):
        if k % stride == 0:
            out_v[out_idx] = v
            out_i[out_idx] = i
            out_s[out_idx] = s
            out_n[out_idx] = n
            out_idx += 1
        fv = current(v, iv)
        gain = gamma_m * (n - n0)
        xi = xi_steps[k]
        v_new = v + dt * (i - fv) * inv_c
        i_new = i + dt * (v0 + rk * drive_steps[k] - v - r * i) * inv_l
        s_new = s + dt * ((gain - inv_tp) * s + gamma_m * n) + sqrt_dt * sqrt(
            max(gamma_m * n * s, 0.0)
        ) * xi
        n_new = n + dt * (pump_coef * v - g_total * n - gain * s)
        if s_new < 0.0:
            s_new = 0.0
        if n_new < 0.0:
            n_new = 0.0
        # finite check: x - x is 0.0 for finite x, NaN for inf/NaN
        if (v_new - v_new != 0.0 or i_new - i_new != 0.0
                or s_new - s_new != 0.0 or n_new - n_new != 0.0):
            t_bad = (k + 1) * dt
            for name, value in (("V", v_new), ("I", i_new), ("S", s_new), ("N", n_new)):
                if not math.isfinite(value):
                    raise IntegrationBlowUpError(name, t_bad)
        v, i, s, n = v_new, i_new, s_new, n_new

    if n_steps % stride == 0:
        out_v[out_idx] = v
        out_i[out_idx] = i
        out_s[out_idx] = s
        out_n[out_idx] = n

    return Trace(
        dt=dt * stride,
        v=out_v,
        i=out_i,
        s=out_s,
        n=out_n,
        s0=drive[::stride][:n_out],
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Step-halving comparison on a common output grid."""

    dt_coarse: float
    dt_fine: float
    max_deviation: dict
    peak_time_shift: Optional[float]
    vpp_relative_change: float

    def summary(self) -> str:
        dev = ", ".join(f"{k}={v:.3e}" for k, v in self.max_deviation.items())
        shift = (
            "n/a" if self.peak_time_shift is None
            else f"{self.peak_time_shift * 1e12:.4f} ps"
        )
        return (
            f"dt {self.dt_coarse:g} -> {self.dt_fine:g}: max dev [{dev}], "
            f"peak shift {shift}, vpp change {self.vpp_relative_change:.3e}"
        )


def _refined_peak_time(trace: Trace, baseline: float) -> float:
    """Quadratic-interpolated time of max |V - baseline|."""
    dev = np.abs(trace.v - baseline)
    k = int(np.argmax(dev))
    if 0 < k < len(dev) - 1:
        y0, y1, y2 = dev[k - 1], dev[k], dev[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            return (k + 0.5 * (y0 - y2) / denom) * trace.dt
    return k * trace.dt


def convergence_check(
    stimulus: Stimulus,
    iv: SchulmanIV,
    cp: CircuitParams,
    lp: LaserParams,
    cfg: SimConfig,
) -> ConvergenceReport:
    """Integrate at dt and dt/2 and compare on the shared output grid.

    Requires deterministic mode (step halving has no meaning for one noise
    path).  The spike-peak shift is None when the run never leaves rest.
    """
    if cfg.noise_enabled:
        raise ValueError("convergence_check requires deterministic mode")
    coarse = integrate(stimulus, iv, cp, lp, cfg)
    fine_cfg = cfg.with_dt(cfg.dt / 2.0, keep_grid=True)
    fine = integrate(stimulus, iv, cp, lp, fine_cfg)

    n = min(len(coarse), len(fine))
    deviation = {
        ch: float(np.max(np.abs(coarse.channel(ch)[:n] - fine.channel(ch)[:n])))
        for ch in ("v", "i", "s", "n")
    }

    v_rest = coarse.v[0]
    excursion = float(np.max(np.abs(coarse.v - v_rest)))
    if excursion < 1e-6:
        peak_shift = None
    else:
        peak_shift = abs(
            _refined_peak_time(coarse, v_rest) - _refined_peak_time(fine, v_rest)
        )

    vpp_coarse = float(coarse.v.max() - coarse.v.min())
    vpp_fine = float(fine.v.max() - fine.v.min())
    vpp_change = abs(vpp_coarse - vpp_fine) / vpp_coarse if vpp_coarse > 0 else 0.0
    return ConvergenceReport(
        dt_coarse=cfg.dt,
        dt_fine=fine_cfg.dt,
        max_deviation=deviation,
        peak_time_shift=peak_shift,
        vpp_relative_change=vpp_change,
    )
