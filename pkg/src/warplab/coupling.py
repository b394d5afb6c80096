"""Distance-comparison coupling, importance weights, Harnack verification.

Two diffusions started at radii r1 and r2 on one meridian are reduced to the
scalar comparison process: the base path follows the radial SDE from r1 and
the inter-point distance is integrated as an ODE with random coefficients
along it,

    d rho = { I(r, rho) + pair(r, rho) - xi } dt,

where I is the curvature index-form bound, ``pair`` a fitted bound on the
two-point potential term, and xi the compensating drift schedule.  The first
hit of rho <= 0 merges the pair for good; that hitting time is the coupling
time tau.  Two schedules are implemented: "quad" (curvature envelope
c + sigma^2 (r + rho)^2, pair bound c1 - delta rho) and "growth" (envelope
Psi(r + rho), pair bound c1 - primitive(rho / 2)).

The same schedule drives the importance weight

    log R = -(1/sqrt 2) sum xi sqrt(h) z  -  (1/4) sum xi^2 h

over steps before tau, with z an independent unit-normal stream standing in
for the projection of the driving noise on the coupling direction.  Weight
moments turn coupling success into dimension-free Harnack inequalities for
the semigroup; the Harnack constant is fitted on a declared calibration grid
of (start, target, horizon) tuples, frozen, and judged on held-out tuples
estimated by independent Monte Carlo semigroup runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as ker
from .diffusion import (_BLOCK, _CHUNK, STREAM_BASE, STREAM_PAIR, SimConfig,
                        _exp_mean_log, drift_spec, path_stream, simulate_radial)
from .errors import ApplicabilityError, DomainError, StepSizeError
from .geometry import (ModelManifold, RadialPotential, ScenarioConditions,
                       applicability)
from .measure import RadialTestFunction

_SQRT2 = math.sqrt(2.0)
_SQRT2P1 = 1.0 + math.sqrt(2.0)

_SCHEDULES = ("quad", "growth")
_XI_MODES = {"schedule": ker.XI_SCHEDULE, "zero": ker.XI_ZERO,
             "const": ker.XI_CONST}


def index_form_bound(k, dim: int, rho):
    """Upper bound for the index form of a geodesic of length rho.

    2 sqrt(K (d-1)) tanh((rho/2) sqrt(K / (d-1))) under a curvature lower
    bound Ric >= -K, K >= 0; the K = 0 limit is 0.  Nondecreasing in both
    K and rho, and bounded by 2 sqrt(K (d-1)).
    """
    if dim < 2:
        raise DomainError("dimension must be >= 2")
    k = np.asarray(k, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(k < 0.0):
        raise DomainError("curvature bound K must be >= 0")
    if np.any(rho < 0.0):
        raise DomainError("distance must be >= 0")
    dm1 = dim - 1.0
    out = 2.0 * np.sqrt(k * dm1) * np.tanh(0.5 * rho * np.sqrt(k / dm1))
    return float(out) if out.ndim == 0 else out


def coupling_drift(schedule: str, sc: ScenarioConditions, dim: int,
                   r_current, rho_xy_start: float, horizon: float,
                   big_c: float, phi_alpha: Optional[float] = None,
                   primitive: Optional[Callable] = None):
    """Compensating drift xi for the comparison process.

    "quad":   xi = big_c + 2 sigma sqrt(d-1) r + rho_start / horizon
    "growth": xi = big_c + 2 theta primitive(r) + rho_start / horizon
    """
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    r = np.asarray(r_current, dtype=float)
    base = big_c + rho_xy_start / horizon
    if schedule == "quad":
        out = base + 2.0 * sc.sigma * math.sqrt(dim - 1.0) * r
    elif schedule == "growth":
        if sc.theta is None:
            raise ApplicabilityError(
                "growth schedule needs theta in the scenario conditions")
        if primitive is None:
            if phi_alpha is None:
                raise DomainError("growth schedule needs phi_alpha or a "
                                  "primitive callable")
            primitive = lambda s: s ** phi_alpha / phi_alpha
        out = base + 2.0 * sc.theta * np.asarray(primitive(r), dtype=float)
    else:
        raise DomainError(f"unknown drift schedule {schedule!r}")
    return float(out) if out.ndim == 0 else out


def fit_pair_constant(v: RadialPotential, sc: ScenarioConditions,
                      schedule: str, phi_alpha: Optional[float] = None,
                      r_max: float = 40.0, n: int = 641) -> float:
    """Smallest nonnegative c1 making the two-point potential bound hold.

    The pair term along a meridian geodesic [x, x + rho] integrates the
    radial Hessian exactly: V'(x + rho) - V'(x).  The fit takes the sup of
    its excess over -delta rho ("quad") or -primitive(rho/2) ("growth") on
    a dense window grid; outside the scanned window the Hessian gap of an
    applicable scenario keeps the excess nonpositive.
    """
    xs = np.linspace(0.0, r_max, n)
    d1 = np.asarray(v.d1(xs), dtype=float)
    ends = xs[:, None] + xs[None, :]           # window [x_i, x_i + rho_j]
    win = np.asarray(v.d1(ends), dtype=float) - d1[:, None]
    if schedule == "quad":
        g = sc.delta * xs[None, :] + win
    elif schedule == "growth":
        if phi_alpha is None or phi_alpha <= 1.0:
            raise DomainError("growth pair fit needs phi_alpha > 1")
        g = win + (0.5 * xs[None, :]) ** phi_alpha / phi_alpha
    else:
        raise DomainError(f"unknown drift schedule {schedule!r}")
    return max(0.0, float(np.max(g)))


@dataclass(frozen=True, eq=False)
class CouplingEnsemble:
    """Terminal state of a batch of comparison processes.

    tau is +inf on paths that never coupled; rho_terminal is 0 there the
    moment they do.  dom_max is the largest value of (d rho / dt) +
    rho_start / horizon seen on any active step (<= 0 certifies the
    linear-decrease domination for the schedule mode).  trace_t /
    trace_mean sample the ensemble-mean distance at noise-block ends.
    """

    schedule: str
    xi_mode: str
    rho_start: float
    horizon: float
    step: float
    seed: int
    n_steps: int
    big_c: float
    pair_constant: float
    r_terminal: np.ndarray
    rho_terminal: np.ndarray
    tau: np.ndarray
    coupled: np.ndarray
    log_weight: np.ndarray
    dom_max: float
    trace_t: np.ndarray
    trace_mean: np.ndarray

    @property
    def coupled_fraction(self) -> float:
        return float(np.mean(self.coupled))


def _require_quad_applicable(sc: ScenarioConditions, dim: int) -> None:
    app = applicability(sc, dim)
    if not app.coupling_pathway:
        raise ApplicabilityError(
            "quad coupling schedule requires delta >= 2 sigma sqrt(d-1) "
            f"= {app.coupling_threshold:.6g}; got delta = {sc.delta:.6g}")


def _require_growth_applicable(sc: ScenarioConditions) -> None:
    if sc.theta is None or not 0.0 < sc.theta < 1.0 / _SQRT2P1:
        got = "none" if sc.theta is None else f"{sc.theta:.6g}"
        raise ApplicabilityError(
            "growth coupling schedule requires 0 < theta < 1/(1+sqrt 2) "
            f"= {1.0 / _SQRT2P1:.6g}; got theta = {got}")


def simulate_comparison(m: ModelManifold, v: RadialPotential,
                        sc: ScenarioConditions, cfg: SimConfig,
                        r1: float, r2: float,
                        horizon: Optional[float] = None,
                        schedule: str = "quad",
                        xi_mode: str = "schedule", xi_const: float = 0.0,
                        big_c: Optional[float] = None,
                        phi_alpha: Optional[float] = None,
                        psi_eps: Optional[float] = None,
                        psi_alpha: Optional[float] = None,
                        c45: Optional[float] = None) -> CouplingEnsemble:
    """Run the comparison process between meridian starts r1 and r2.

    The base path starts at r1; the initial distance is |r2 - r1|.  When
    big_c is not given it is fitted so the schedule dominates: 2 sqrt(c
    (d-1)) + c1 for "quad", 2 c45 + c1 for "growth" (c45 from the growth
    domination check of the contractivity module, c1 the pair-term fit).
    Paths started coupled (r1 = r2) have tau = 0 and weight 1.
    """
    if r1 < 0.0 or r2 < 0.0:
        raise DomainError("start radii must be >= 0")
    if xi_mode not in _XI_MODES:
        raise DomainError(f"unknown xi mode {xi_mode!r}")
    h = cfg.step
    horizon = cfg.horizon if horizon is None else float(horizon)
    n_steps = int(round(horizon / h))
    if n_steps < 1 or abs(n_steps * h - horizon) > 1e-6 * max(1.0, horizon):
        raise DomainError("horizon must be a positive integer multiple of "
                          "the step")

    dm1 = m.dim - 1.0
    twosig = 2.0 * sc.sigma * math.sqrt(dm1)
    twotheta = 0.0
    eps = 0.0
    twoalpha = 0.0
    phia = 1.0
    if schedule == "quad":
        _require_quad_applicable(sc, m.dim)
        sched_code = ker.SCHED_QUAD
        c1 = fit_pair_constant(v, sc, "quad")
        if big_c is None:
            big_c = 2.0 * math.sqrt(sc.c * dm1) + c1
    elif schedule == "growth":
        _require_growth_applicable(sc)
        if phi_alpha is None or psi_eps is None:
            raise DomainError("growth schedule needs phi_alpha and psi_eps")
        if c45 is None and big_c is None:
            raise ApplicabilityError(
                "growth coupling schedule requires the fitted growth "
                "domination constant (c45); run the contractivity check "
                "first")
        sched_code = ker.SCHED_GROWTH
        twotheta = 2.0 * sc.theta
        eps = float(psi_eps)
        twoalpha = 2.0 * (phi_alpha if psi_alpha is None else psi_alpha)
        phia = float(phi_alpha)
        c1 = fit_pair_constant(v, sc, "growth", phi_alpha=phi_alpha)
        if big_c is None:
            big_c = 2.0 * c45 + c1
    else:
        raise DomainError(f"unknown drift schedule {schedule!r}")

    rho0 = abs(float(r2) - float(r1))
    rho0_over_t = rho0 / horizon
    start = max(float(r1), cfg.pole_guard)
    spec = drift_spec(m, v)
    impl = ker.get_impl()
    mode_code = _XI_MODES[xi_mode]
    n = cfg.paths
    rmin = cfg.pole_guard
    n_blocks = (n_steps + _BLOCK - 1) // _BLOCK
    block_len = [min(_BLOCK, n_steps - b * _BLOCK) for b in range(n_blocks)]
    trace_t = h * np.cumsum(block_len)
    trace_sum = np.zeros(n_blocks)

    r_out = np.empty(n)
    rho_out = np.empty(n)
    tau_out = np.empty(n)
    coupled_out = np.empty(n, dtype=bool)
    logw_out = np.empty(n)
    dom_global = -math.inf

    for c0 in range(0, n, _CHUNK):
        csize = min(_CHUNK, n - c0)
        cr = np.full(csize, start)
        crho = np.full(csize, rho0)
        lm = np.zeros(csize)
        lc = np.zeros(csize)
        dommax = np.full(csize, -math.inf)
        tau = np.full(csize, math.inf)
        coupled = np.zeros(csize, dtype=np.uint8)
        if rho0 <= 0.0:
            coupled[:] = 1
            tau[:] = 0.0
        gens = [path_stream(cfg.seed, i, STREAM_BASE)
                for i in range(c0, c0 + csize)]
        gens2 = [path_stream(cfg.seed, i, STREAM_PAIR)
                 for i in range(c0, c0 + csize)]
        k0 = 0
        for b in range(n_blocks):
            blen = block_len[b]
            zb = np.empty((csize, blen))
            z2b = np.empty((csize, blen))
            for row, g in enumerate(gens):
                zb[row] = g.standard_normal(blen)
            for row, g in enumerate(gens2):
                z2b[row] = g.standard_normal(blen)
            flag = ker.comparison_block(
                impl, cr, crho, zb, z2b, h, rmin, spec, sched_code,
                sc.c, sc.sigma, sc.delta, c1, big_c, twosig, twotheta,
                eps, twoalpha, phia, rho0_over_t, mode_code, xi_const,
                k0, lm, lc, dommax, tau, coupled)
            if flag:
                raise StepSizeError(
                    "drift would move a path more than one unit per step; "
                    "reduce cfg.step")
            k0 += blen
            trace_sum[b] += float(np.sum(crho))
        sl = slice(c0, c0 + csize)
        r_out[sl] = cr
        rho_out[sl] = crho
        tau_out[sl] = tau
        coupled_out[sl] = coupled.astype(bool)
        logw_out[sl] = -lm / _SQRT2 - 0.25 * h * lc
        with np.errstate(invalid="ignore"):
            dom_global = max(dom_global, float(np.max(dommax)))

    return CouplingEnsemble(
        schedule=schedule, xi_mode=xi_mode, rho_start=rho0, horizon=horizon,
        step=h, seed=cfg.seed, n_steps=n_steps, big_c=float(big_c),
        pair_constant=c1, r_terminal=r_out, rho_terminal=rho_out,
        tau=tau_out, coupled=coupled_out, log_weight=logw_out,
        dom_max=dom_global, trace_t=trace_t,
        trace_mean=trace_sum / n)


def girsanov_weight(ens: CouplingEnsemble) -> np.ndarray:
    """Per-path log importance weight log R accumulated before tau."""
    return ens.log_weight.copy()


@dataclass(frozen=True)
class WeightMoment:
    """Monte Carlo estimate of E[R^q] with delta-method error bar."""

    q: float
    value: float
    log_value: float
    rel_se: float
    ess: float


def weight_moment(ens: CouplingEnsemble, q: float) -> WeightMoment:
    mean_log, ess, rel_se = _exp_mean_log(q * ens.log_weight)
    return WeightMoment(q=q, value=math.exp(mean_log), log_value=mean_log,
                        rel_se=rel_se, ess=ess)


def exp_martingale_bound(beta: float, p: float, xi: float,
                         horizon: float) -> tuple:
    """Closed-form sides of the exponential-moment bound for constant xi.

    For M = xi W with deterministic bracket <M> = xi^2 T:
      lhs = E exp(beta M - (beta/2)<M>)            = exp(beta(beta-1)/2 xi^2 T)
      rhs = (E exp(beta p (beta p - 1)/(2(p-1)) <M>))^((p-1)/p)
                                                   = exp(beta(beta p-1)/2 xi^2 T)
    lhs <= rhs for every p > 1.
    """
    if p <= 1.0:
        raise DomainError("need p > 1")
    if horizon < 0.0:
        raise DomainError("horizon must be >= 0")
    q = xi * xi * horizon
    lhs = math.exp(0.5 * beta * (beta - 1.0) * q)
    rhs = math.exp(0.5 * beta * (beta * p - 1.0) * q)
    return lhs, rhs


def holder_exponent(alpha: float, p: float) -> float:
    """Coefficient p a (p a - a + 1) / (8 (p - 1) (a - 1)^2) of int xi^2.

    Decreasing toward 1/8 as a -> inf, p -> 1.
    """
    if alpha <= 1.0:
        raise DomainError("need alpha > 1")
    if p <= 1.0:
        raise DomainError("need p > 1")
    return (p * alpha * (p * alpha - alpha + 1.0)
            / (8.0 * (p - 1.0) * (alpha - 1.0) ** 2))


# --------------------------------------------------------------------------
# Harnack inequality: Monte Carlo fit/freeze protocol


def default_harnack_functions() -> tuple:
    """Two positive bounded radial observables for the Harnack protocol."""
    def f1(r):
        r = np.asarray(r, dtype=float)
        return 1.0 + np.exp(-r * r)

    def df1(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * r * np.exp(-r * r)

    def f2(r):
        r = np.asarray(r, dtype=float)
        return 2.0 + np.sin(r) * np.exp(-((r - 2.0) ** 2))

    def df2(r):
        r = np.asarray(r, dtype=float)
        e = np.exp(-((r - 2.0) ** 2))
        return (np.cos(r) - 2.0 * (r - 2.0) * np.sin(r)) * e

    return (RadialTestFunction("one_plus_gauss", f1, df1),
            RadialTestFunction("two_plus_sin_bump", f2, df2))


DEFAULT_CALIBRATION_GRID = ((0.5, 1.0, 1.5), (0.75, 1.25, 1.75),
                            (0.5, 1.0, 2.0))
DEFAULT_HELD_OUT_GRID = ((0.8, 1.3), (1.0, 1.6), (0.75, 1.5))


def _child_seed(seed: int, start: float, horizon: float) -> int:
    # distinct deterministic stream per (start, horizon) ensemble
    ss = np.random.SeedSequence(
        (seed, int(round(start * 2 ** 20)), int(round(horizon * 2 ** 20))))
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


class _EnsembleCache:
    """Terminal radii keyed by (start, horizon); one MC run per key."""

    def __init__(self, m: ModelManifold, v: RadialPotential, cfg: SimConfig):
        self.m = m
        self.v = v
        self.cfg = cfg
        self._store = {}

    def key(self, start: float, horizon: float) -> tuple:
        return (round(float(start), 12), round(float(horizon), 12))

    def terminal(self, start: float, horizon: float) -> np.ndarray:
        k = self.key(start, horizon)
        if k not in self._store:
            sub = SimConfig(step=self.cfg.step, horizon=k[1],
                            paths=self.cfg.paths,
                            seed=_child_seed(self.cfg.seed, *k),
                            pole_guard=self.cfg.pole_guard)
            ens = simulate_radial(self.m, self.v, sub, r_start=k[0])
            self._store[k] = ens.r_terminal
        return self._store[k]


def _mean_se(values: np.ndarray) -> tuple:
    n = values.size
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return mean, se


@dataclass(frozen=True)
class HarnackReport:
    """One start/target/horizon tuple of the Harnack comparison.

    lhs = (estimate of P_T f at the target y)^alpha, rhs = estimate of
    P_T f^alpha at the start x times the fitted envelope exp(C (rho^2/T +
    T + x^2)).  paired marks the x = y case, where both sides share one
    ensemble and the power-mean inequality forces margin >= 0 exactly.
    """

    f_name: str
    alpha: float
    horizon: float
    r_x: float
    r_y: float
    lhs: float
    rhs: float
    rhs_main: float
    p_f_y: float
    p_falpha_x: float
    se_f_y: float
    se_falpha_x: float
    big_c: float
    margin_log: float
    se_log: float
    verdict: str
    required_paths: float
    held_out: bool
    paired: bool


@dataclass(frozen=True, eq=False)
class HarnackSummary:
    alpha: float
    schedule: str
    big_c: float
    calibration: tuple
    held_out: tuple
    verdict: str


def _envelope(schedule: str, x: float, y: float, horizon: float,
              phi_of_r2: Optional[Callable]) -> float:
    rho2 = (x - y) ** 2
    if schedule == "quad":
        return rho2 / horizon + horizon + x * x
    if phi_of_r2 is None:
        raise DomainError("growth Harnack envelope needs phi_of_r2")
    return rho2 / horizon + horizon + float(phi_of_r2(x * x))


def _evaluate_tuple(cache: _EnsembleCache, f: RadialTestFunction,
                    alpha: float, x: float, y: float, horizon: float,
                    big_c: float, schedule: str,
                    phi_of_r2: Optional[Callable],
                    held_out: bool) -> HarnackReport:
    ty = cache.terminal(y, horizon)
    tx = cache.terminal(x, horizon)
    m_y, se_y = _mean_se(np.asarray(f.f(ty), dtype=float))
    m_x, se_x = _mean_se(np.asarray(f.f(tx), dtype=float) ** alpha)
    env = _envelope(schedule, x, y, horizon, phi_of_r2)
    lhs = m_y ** alpha
    rhs = m_x * math.exp(big_c * env)
    margin = math.log(rhs) - math.log(lhs)
    se = math.hypot(alpha * se_y / m_y, se_x / m_x)
    paired = cache.key(x, horizon) == cache.key(y, horizon)
    required = 0.0
    if paired:
        verdict = "pass" if margin >= -1e-12 else "fail"
    elif margin >= 3.0 * se:
        verdict = "pass"
    elif margin < 0.0 and margin <= -3.0 * se:
        verdict = "fail"
    else:
        verdict = "inconclusive"
        # paths needed so 3 SE would resolve the observed margin
        required = (math.inf if margin == 0.0 else
                    cache.cfg.paths * (3.0 * se / abs(margin)) ** 2)
    return HarnackReport(
        f_name=f.name, alpha=alpha, horizon=horizon, r_x=x, r_y=y,
        lhs=lhs, rhs=rhs, rhs_main=m_x, p_f_y=m_y, p_falpha_x=m_x,
        se_f_y=se_y, se_falpha_x=se_x, big_c=big_c, margin_log=margin,
        se_log=se, verdict=verdict, required_paths=required,
        held_out=held_out, paired=paired)


def _implied_constant(cache: _EnsembleCache, f: RadialTestFunction,
                      alpha: float, x: float, y: float, horizon: float,
                      schedule: str, phi_of_r2: Optional[Callable]) -> float:
    ty = cache.terminal(y, horizon)
    tx = cache.terminal(x, horizon)
    m_y = float(np.mean(np.asarray(f.f(ty), dtype=float)))
    m_x = float(np.mean(np.asarray(f.f(tx), dtype=float) ** alpha))
    env = _envelope(schedule, x, y, horizon, phi_of_r2)
    return max(0.0, (alpha * math.log(m_y) - math.log(m_x)) / env)


def _grid_tuples(grid: Sequence) -> list:
    xs, ys, ts = grid
    return [(float(x), float(y), float(t)) for x in xs for y in ys
            for t in ts]


def _check_harnack_applicable(sc: ScenarioConditions, dim: int,
                              schedule: str) -> None:
    if schedule == "quad":
        _require_quad_applicable(sc, dim)
    elif schedule == "growth":
        _require_growth_applicable(sc)
    else:
        raise DomainError(f"unknown drift schedule {schedule!r}")


def harnack_protocol(m: ModelManifold, v: RadialPotential,
                     sc: ScenarioConditions, cfg: SimConfig,
                     fs: Optional[Sequence] = None, alpha: float = 2.0,
                     calibration: Sequence = DEFAULT_CALIBRATION_GRID,
                     held_out: Sequence = DEFAULT_HELD_OUT_GRID,
                     schedule: str = "quad",
                     phi_of_r2: Optional[Callable] = None) -> HarnackSummary:
    """Fit the Harnack constant on the calibration grid, judge held-out.

    The constant is the max over calibration tuples and observables of the
    implied constant (clamped at 0), so every calibration row holds with
    margin >= 0 by construction; held-out rows are the actual test.  The
    summary verdict is "fail" if any held-out row fails, else
    "inconclusive" if any row cannot be resolved at 3 SE, else "pass".
    """
    if alpha <= 1.0:
        raise DomainError("need alpha > 1")
    _check_harnack_applicable(sc, m.dim, schedule)
    if fs is None:
        fs = default_harnack_functions()
    cache = _EnsembleCache(m, v, cfg)
    big_c = 0.0
    for x, y, t in _grid_tuples(calibration):
        for f in fs:
            big_c = max(big_c, _implied_constant(cache, f, alpha, x, y, t,
                                                 schedule, phi_of_r2))
    cal_rows = tuple(
        _evaluate_tuple(cache, f, alpha, x, y, t, big_c, schedule,
                        phi_of_r2, held_out=False)
        for x, y, t in _grid_tuples(calibration) for f in fs)
    held_rows = tuple(
        _evaluate_tuple(cache, f, alpha, x, y, t, big_c, schedule,
                        phi_of_r2, held_out=True)
        for x, y, t in _grid_tuples(held_out) for f in fs)
    if any(r.verdict == "fail" for r in held_rows):
        verdict = "fail"
    elif any(r.verdict == "inconclusive" for r in held_rows):
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return HarnackSummary(alpha=alpha, schedule=schedule, big_c=big_c,
                          calibration=cal_rows, held_out=held_rows,
                          verdict=verdict)


def harnack_check(m: ModelManifold, v: RadialPotential,
                  sc: ScenarioConditions, cfg: SimConfig,
                  f: RadialTestFunction, alpha: float, r_x: float,
                  r_y: float, horizon: float,
                  big_c: Optional[float] = None,
                  calibration: Sequence = DEFAULT_CALIBRATION_GRID,
                  schedule: str = "quad",
                  phi_of_r2: Optional[Callable] = None) -> HarnackReport:
    """Judge one (x, y, T) tuple; fit the constant first when not given."""
    if alpha <= 1.0:
        raise DomainError("need alpha > 1")
    _check_harnack_applicable(sc, m.dim, schedule)
    cache = _EnsembleCache(m, v, cfg)
    if big_c is None:
        big_c = 0.0
        for x, y, t in _grid_tuples(calibration):
            big_c = max(big_c, _implied_constant(cache, f, alpha, x, y, t,
                                                 schedule, phi_of_r2))
    return _evaluate_tuple(cache, f, alpha, float(r_x), float(r_y),
                           float(horizon), float(big_c), schedule,
                           phi_of_r2, held_out=True)


@dataclass(frozen=True)
class ChainReport:
    """Consistency of the Harnack chain with measured weight moments.

    rhs = P_T f^alpha(x) (E R^{alpha/(alpha-1)})^{alpha-1} must dominate
    lhs = (P_T f(y))^alpha within combined Monte Carlo error.
    """

    f_name: str
    alpha: float
    horizon: float
    r_x: float
    r_y: float
    lhs: float
    rhs: float
    margin_log: float
    se_log: float
    ess: float
    verdict: str


def harnack_chain_check(m: ModelManifold, v: RadialPotential,
                        sc: ScenarioConditions, cfg: SimConfig,
                        f: RadialTestFunction, alpha: float, r_x: float,
                        r_y: float, horizon: float,
                        schedule: str = "quad", **sim_kwargs) -> ChainReport:
    """Check lhs <= P_T f^alpha(x) (E R^{alpha/(alpha-1)})^{alpha-1}."""
    if alpha <= 1.0:
        raise DomainError("need alpha > 1")
    ens = simulate_comparison(m, v, sc, cfg, r_x, r_y, horizon,
                              schedule=schedule, **sim_kwargs)
    wm = weight_moment(ens, alpha / (alpha - 1.0))
    cache = _EnsembleCache(m, v, cfg)
    m_y, se_y = _mean_se(np.asarray(f.f(cache.terminal(r_y, horizon)),
                                    dtype=float))
    m_x, se_x = _mean_se(np.asarray(f.f(cache.terminal(r_x, horizon)),
                                    dtype=float) ** alpha)
    lhs = m_y ** alpha
    log_rhs = math.log(m_x) + (alpha - 1.0) * wm.log_value
    margin = log_rhs - math.log(lhs)
    se = math.sqrt((alpha * se_y / m_y) ** 2 + (se_x / m_x) ** 2
                   + ((alpha - 1.0) * wm.rel_se) ** 2)
    if wm.ess < 100.0:
        verdict = "unreliable"
    elif margin >= -3.0 * se:
        verdict = "pass"
    else:
        verdict = "fail"
    return ChainReport(f_name=f.name, alpha=alpha, horizon=horizon,
                       r_x=float(r_x), r_y=float(r_y), lhs=lhs,
                       rhs=math.exp(log_rhs), margin_log=margin, se_log=se,
                       ess=wm.ess, verdict=verdict)
