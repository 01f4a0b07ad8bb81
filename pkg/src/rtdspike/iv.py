"""Schulman-form I-V nonlinearity of a resonant tunnelling diode.

The static tunnelling current is

    f(V) = a * ln[(1 + exp((b - c + n1*V)/VT)) / (1 + exp((b - c - n1*V)/VT))]
             * [pi/2 + atan((c - n1*V)/d)]
           + h * (exp(n2*V/VT) - 1)

with VT the thermal voltage.  The first (resonant) term produces the current
peak and the drop into the valley; the second (leakage) term restores the
upslope beyond the valley.  Between the peak and the valley the slope f'(V)
is negative: the NDC window that makes the biased circuit excitable.

Both exponential groups are evaluated in log-space (softplus form for the
bracket, shifted exponent for the leakage term) so the function stays finite
and accurate for exponents up to ~700 in magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoNdcError

__all__ = [
    "SchulmanIV",
    "IVMetadata",
    "schulman_current",
    "schulman_current_grid",
    "schulman_conductance",
    "analyze_iv",
]

_BISECT_ITERS = 60          # machine-precision bracket on a ~1 V interval
_LOG_SPACE_EXPONENT = 350.0  # switch leakage term to exp(log h + y) above this


@dataclass(frozen=True)
class SchulmanIV:
    """Parameters of the N-shaped tunnelling current.

    a: current scale of the resonant term (A).
    b, c: energy-offset voltages (V).
    d: resonance broadening voltage (V).
    n1, n2: dimensionless voltage-scaling factors.
    h: diode-leakage current scale (A).
    vt: thermal voltage kT/q (V).
    """

    a: float
    b: float
    c: float
    d: float
    n1: float
    n2: float
    h: float
    vt: float = 2.5852e-2

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "n1", "n2", "h", "vt"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"SchulmanIV.{name} must be finite, got {value!r}")
        for name in ("a", "d", "n1", "n2", "vt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"SchulmanIV.{name} must be > 0")
        if self.h < 0:
            raise ValueError("SchulmanIV.h must be >= 0")


@dataclass(frozen=True)
class IVMetadata:
    """Peak/valley/NDC summary of an analyzed I-V curve (all SI units)."""

    v_peak: float
    i_peak: float
    v_valley: float
    i_valley: float
    pvcr: float
    ndc_lo: float
    ndc_hi: float


def _softplus(x: float) -> float:
    # log(1 + e^x), exact for x -> 0 and safe for |x| up to ~700
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def schulman_current(v: float, p: SchulmanIV) -> float:
    """Tunnelling current f(v) in amperes at a single voltage."""
    if not math.isfinite(v):
        raise ValueError(f"voltage must be finite, got {v!r}")
    x1 = (p.b - p.c + p.n1 * v) / p.vt
    x2 = (p.b - p.c - p.n1 * v) / p.vt
    resonant = p.a * (_softplus(x1) - _softplus(x2)) * (
        math.pi / 2 + math.atan((p.c - p.n1 * v) / p.d)
    )
    y = p.n2 * v / p.vt
    try:
        if p.h == 0.0:
            leakage = 0.0
        elif y > _LOG_SPACE_EXPONENT:
            leakage = math.exp(math.log(p.h) + y) - p.h
        else:
            leakage = p.h * (math.exp(y) - 1.0)
    except OverflowError:
        leakage = math.inf
    return resonant + leakage


def schulman_current_grid(v: np.ndarray, p: SchulmanIV) -> np.ndarray:
    """Vectorized f(v) over a voltage grid (same formula as the scalar path)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("voltage grid contains non-finite values")
    x1 = (p.b - p.c + p.n1 * v) / p.vt
    x2 = (p.b - p.c - p.n1 * v) / p.vt
    sp1 = np.where(x1 > 0, x1, 0.0) + np.log1p(np.exp(-np.abs(x1)))
    sp2 = np.where(x2 > 0, x2, 0.0) + np.log1p(np.exp(-np.abs(x2)))
    resonant = p.a * (sp1 - sp2) * (np.pi / 2 + np.arctan((p.c - p.n1 * v) / p.d))
    y = p.n2 * v / p.vt
    with np.errstate(over="ignore"):
        if p.h == 0.0:
            leakage = np.zeros_like(y)
        else:
            leakage = np.where(
                y > _LOG_SPACE_EXPONENT,
                np.exp(np.log(p.h) + y) - p.h,
                p.h * (np.exp(np.minimum(y, _LOG_SPACE_EXPONENT)) - 1.0),
            )
    return resonant + leakage


def schulman_conductance(v, p: SchulmanIV):
    """Analytic differential conductance f'(v); accepts a float or an array."""
    v = np.asarray(v, dtype=float)
    x1 = (p.b - p.c + p.n1 * v) / p.vt
    x2 = (p.b - p.c - p.n1 * v) / p.vt
    sp1 = np.where(x1 > 0, x1, 0.0) + np.log1p(np.exp(-np.abs(x1)))
    sp2 = np.where(x2 > 0, x2, 0.0) + np.log1p(np.exp(-np.abs(x2)))
    sig1 = 1.0 / (1.0 + np.exp(-np.clip(x1, -700, 700)))
    sig2 = 1.0 / (1.0 + np.exp(-np.clip(x2, -700, 700)))
    u = (p.c - p.n1 * v) / p.d
    bracket = np.pi / 2 + np.arctan(u)
    y = np.minimum(p.n2 * v / p.vt, 700.0)
    with np.errstate(over="ignore"):
        leak = p.h * (p.n2 / p.vt) * np.exp(y)
    out = (
        p.a * (p.n1 / p.vt) * (sig1 + sig2) * bracket
        - p.a * (sp1 - sp2) * (p.n1 / p.d) / (1.0 + u * u)
        + leak
    )
    return float(out) if out.ndim == 0 else out


def _bisect_conductance_zero(p: SchulmanIV, lo: float, hi: float, falling: bool) -> float:
    """Refine a sign change of f' inside [lo, hi] to machine precision."""
    lo, hi = float(lo), float(hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if (schulman_conductance(mid, p) > 0.0) == falling:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def analyze_iv(
    p: SchulmanIV,
    v_range: tuple[float, float] = (0.0, 3.0),
    resolution: int = 12001,
) -> IVMetadata:
    """Locate the current peak, valley, PVCR and NDC window of f(V).

    The grid scan finds sign changes of f'; each is refined by bisection.
    The NDC window is the maximal f' < 0 interval between the refined peak
    and valley.  Raises NoNdcError when f' never changes sign in range.
    """
    lo, hi = v_range
    if not (hi > lo):
        raise ValueError(f"empty voltage range {v_range!r}")
    if resolution < 1000:
        raise ValueError("resolution must be >= 1000")
    vs = np.linspace(lo, hi, resolution)
    fp = schulman_conductance(vs, p)
    sign = np.sign(fp)
    flips = np.nonzero(np.diff(sign) != 0)[0]

    v_peak = v_valley = None
    for k in flips:
        if fp[k] > 0.0 >= fp[k + 1] and v_peak is None:
            v_peak = _bisect_conductance_zero(p, vs[k], vs[k + 1], falling=True)
        elif fp[k] < 0.0 <= fp[k + 1] and v_peak is not None:
            v_valley = _bisect_conductance_zero(p, vs[k], vs[k + 1], falling=False)
            break
    if v_peak is None or v_valley is None:
        raise NoNdcError(
            f"no NDC found: f' has no falling/rising sign-change pair in {v_range!r}"
        )

    i_peak = schulman_current(v_peak, p)
    i_valley = schulman_current(v_valley, p)
    # maximal f' < 0 interval between the extrema (equals (v_peak, v_valley)
    # for a single-lobe resonance, but scan rather than assume)
    inner = np.linspace(v_peak, v_valley, 2001)
    fp_inner = schulman_conductance(inner, p)
    negative = fp_inner < 0.0
    if not negative[1:-1].any():
        raise NoNdcError("no NDC found: f' not negative between the extrema")
    runs = []
    start = None
    for k, neg in enumerate(negative):
        if neg and start is None:
            start = k
        elif not neg and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(negative) - 1))
    lo_idx, hi_idx = max(runs, key=lambda r: r[1] - r[0])
    if lo_idx == 0:
        ndc_lo = v_peak
    else:
        ndc_lo = _bisect_conductance_zero(p, inner[lo_idx - 1], inner[lo_idx], falling=True)
    if hi_idx == len(inner) - 1:
        ndc_hi = v_valley
    else:
        ndc_hi = _bisect_conductance_zero(p, inner[hi_idx], inner[hi_idx + 1], falling=False)

    return IVMetadata(
        v_peak=float(v_peak),
        i_peak=float(i_peak),
        v_valley=float(v_valley),
        i_valley=float(i_valley),
        pvcr=float(i_peak / i_valley),
        ndc_lo=float(ndc_lo),
        ndc_hi=float(ndc_hi),
    )
