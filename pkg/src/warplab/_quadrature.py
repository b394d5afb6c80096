"""Adaptive composite Gauss-Legendre quadrature for radial densities.

Integrands are supplied as a log-weight plus an optional plain factor: the
value computed is ``I = int factor(r) * exp(log_weight(r)) dr``.  Working from
the log weight keeps densities whose exponents cancel analytically (warp
volume against potential) finite in float64, and lets the improper-integral
driver classify divergence by inspecting the log weight instead of
overflowing.

Improper integrals extend the domain by doubling segments.  Beyond an
automatically detected start radius (past the bulk of the integrand) every
doubled tail segment must shrink by at least a factor of two; three
consecutive violations classify the integral as divergent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureError

_X20, _W20 = roots_legendre(20)
_X40, _W40 = roots_legendre(40)

# exp() arguments above this are treated as an overflow signal
_LOG_HUGE = 700.0
# improper integrals never extend beyond this radius
_R_CAP = 1.0e6


@dataclass
class IntegralResult:
    value: float
    abs_err: float
    converged: bool
    divergent: bool = False
    r_end: float = 0.0
    tail_trace: list = field(default_factory=list)

    def require_converged(self, what: str = "integral") -> float:
        if not self.converged:
            raise QuadratureError(f"{what} did not converge (divergent={self.divergent})")
        return self.value


def _eval(log_weight, factor, x):
    lw = np.asarray(log_weight(x), dtype=float)
    if factor is None:
        fv = np.ones_like(lw)
    else:
        fv = np.asarray(factor(x), dtype=float)
    return lw, fv


def _panel(log_weight, factor, a, b):
    """Gauss-Legendre 20/40 pair on [a, b]; error from the difference."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x20 = mid + half * _X20
    x40 = mid + half * _X40
    lw20, f20 = _eval(log_weight, factor, x20)
    lw40, f40 = _eval(log_weight, factor, x40)
    finite20 = np.isfinite(lw20)
    finite40 = np.isfinite(lw40)
    # -inf log weight means zero density; +inf / nan is a genuine problem
    if np.any(np.isnan(lw20)) or np.any(np.isnan(lw40)) \
            or np.any(lw20[~finite20] > 0) or np.any(lw40[~finite40] > 0):
        raise QuadratureError("log weight evaluated to +inf/nan")
    shift_candidates = []
    if np.any(finite20):
        shift_candidates.append(np.max(lw20[finite20]))
    if np.any(finite40):
        shift_candidates.append(np.max(lw40[finite40]))
    if not shift_candidates:
        return 0.0, 0.0, 0.0
    shift = max(shift_candidates)
    if shift > _LOG_HUGE:
        raise QuadratureError(f"integrand exceeds exp({_LOG_HUGE}) near r={mid:.3g}")
    e20 = np.where(finite20, np.exp(lw20 - shift), 0.0)
    e40 = np.where(finite40, np.exp(lw40 - shift), 0.0)
    scale = math.exp(shift) if shift > -_LOG_HUGE else 0.0
    v20 = half * float(np.dot(_W20, f20 * e20)) * scale
    v40 = half * float(np.dot(_W40, f40 * e40)) * scale
    return v40, abs(v40 - v20), shift


def integrate(log_weight, factor, a, b, atol=1.0e-10, rtol=1.0e-8, max_panels=4000):
    """Adaptive integral of factor * exp(log_weight) over a finite interval."""
    if not b > a:
        return IntegralResult(0.0, 0.0, True, r_end=b)
    stack = [(a, b)]
    total = 0.0
    err = 0.0
    n_panels = 0
    width = b - a
    while stack:
        lo, hi = stack.pop()
        v, e, _ = _panel(log_weight, factor, lo, hi)
        tol_here = atol * (hi - lo) / width + rtol * abs(v)
        if e <= tol_here or (hi - lo) < 1.0e-13 * width:
            total += v
            err += e
        else:
            n_panels += 1
            if n_panels > max_panels:
                raise QuadratureError("panel budget exhausted")
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid))
            stack.append((mid, hi))
    return IntegralResult(total, err, True, r_end=b)


def _looks_divergent(log_weight, r_from):
    """Early exit for log weights that grow without bound."""
    r = max(r_from, 1.0)
    prev = float(log_weight(np.array([r]))[0])
    for _ in range(24):
        r *= 2.0
        cur = float(log_weight(np.array([r]))[0])
        if not (cur > prev):
            return False
        if cur > _LOG_HUGE:
            return True
        prev = cur
    return False


def _bulk_radius(log_weight, a):
    """Coarse scan for where the integrand stops growing."""
    rs = np.geomspace(max(a, 1.0e-3) + 1.0e-9, 1.0e4, 200)
    lw = np.asarray(log_weight(rs), dtype=float)
    lw = np.where(np.isfinite(lw), lw, -np.inf)
    return float(rs[int(np.argmax(lw))])


def _support_radius(log_weight, factor, a):
    """Largest scanned radius carrying non-negligible integrand mass.

    The negligible-tail early exit must not fire before the scan has passed
    this point: integrands whose factor vanishes on a head interval (support
    starting away from the origin) would otherwise read as converged at 0.
    """
    rs = np.geomspace(max(a, 1.0e-6) + 1.0e-9, 1.0e4, 512)
    lw, fv = _eval(log_weight, factor, rs)
    lw = np.where(np.isfinite(lw), lw, -np.inf)
    nz = fv != 0.0
    lmag = np.where(nz, np.log(np.abs(np.where(nz, fv, 1.0))), -np.inf)
    mag = lw + lmag
    top = float(np.max(mag))
    if not math.isfinite(top):
        return a
    keep = rs[mag >= top - 45.0]
    return float(keep[-1]) if keep.size else a


def integrate_improper(log_weight, factor=None, a=0.0, atol=1.0e-10, rtol=1.0e-8,
                       first_segment=1.0):
    """Improper integral over [a, inf) with the doubling tail protocol."""
    if _looks_divergent(log_weight, max(a, 1.0)):
        return IntegralResult(math.inf, math.inf, False, divergent=True, r_end=math.inf)
    bulk = _bulk_radius(log_weight, a)
    support = _support_radius(log_weight, factor, a)
    r0 = max(first_segment, a + first_segment)
    head = integrate(log_weight, factor, a, r0, atol=atol, rtol=rtol)
    total = head.value
    err = head.abs_err
    trace = []
    lo = r0
    prev_tail = None
    fails = 0
    enforcing = False
    last_signed = 0.0
    last_ratio = 0.5
    prev_ratio = None
    while lo < _R_CAP:
        hi = 2.0 * lo
        try:
            seg = integrate(log_weight, factor, lo, hi, atol=atol, rtol=rtol)
        except QuadratureError:
            return IntegralResult(math.inf, math.inf, False, divergent=True,
                                  r_end=lo, tail_trace=trace)
        tail = abs(seg.value)
        trace.append((lo, hi, seg.value))
        total += seg.value
        err += seg.abs_err
        if hi > support and tail <= atol * 1.0e-2 + rtol * 1.0e-2 * abs(total):
            return IntegralResult(total, err + tail, True, r_end=hi, tail_trace=trace)
        if prev_tail is not None and hi > 2.0 * bulk:
            halved = tail <= 0.5 * prev_tail * 1.02
            if prev_tail > 0.0:
                prev_ratio = last_ratio
                last_ratio = tail / prev_tail
            if halved:
                enforcing = True
                fails = 0
            elif enforcing or tail >= prev_tail:
                fails += 1
                if fails >= 3:
                    return IntegralResult(math.inf, math.inf, False, divergent=True,
                                          r_end=hi, tail_trace=trace)
            else:
                fails = 0
        prev_tail = tail
        last_signed = seg.value
        lo = hi
    if enforcing and fails == 0 and last_ratio < 0.9:
        # tails proven geometric out to the radius cap: sum the remainder
        # by the measured ratio (exact for power-law integrands)
        rem = last_signed * last_ratio / (1.0 - last_ratio)
        drift = abs(last_ratio - prev_ratio) if prev_ratio is not None else 0.1
        err += abs(rem) * min(1.0, 4.0 * drift / (1.0 - last_ratio))
        return IntegralResult(total + rem, err, True, r_end=_R_CAP,
                              tail_trace=trace)
    return IntegralResult(math.inf, math.inf, False, divergent=True,
                          r_end=_R_CAP, tail_trace=trace)
