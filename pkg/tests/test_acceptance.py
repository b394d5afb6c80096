"""End-to-end acceptance battery.

One test per numbered claim, in order, so a verbose run prints one
pass/fail line for each.  Monte Carlo checks state their error budget
(3 SE unless noted); closed-form oracles are computed inline and
independently of the code under test wherever one exists.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import i0e

from warplab import contractivity as ct
from warplab import coupling as cp
from warplab import diffusion as di
from warplab import geometry as geo
from warplab import measure as me
from warplab import report as rp
from warplab import scenarios as sn
from warplab.diffusion import SimConfig
from warplab.suites import run_suites

SQRT2P1 = 1.0 + math.sqrt(2.0)
THETA = 0.9 / SQRT2P1


def flat_setup(delta=2.0):
    m = geo.flat(2)
    v = geo.gaussian_well(delta)
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=delta)
    return m, v, sc


def warp_setup():
    return geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(1.0, 1.0)


class Stopwatch:
    def __init__(self, limit):
        self.limit = limit
        self.t0 = time.monotonic()

    def check(self):
        elapsed = time.monotonic() - self.t0
        assert elapsed < self.limit, f"took {elapsed:.1f}s, budget {self.limit}s"


def test_01_gaussian_entropy_energy_direction():
    # quadratic well of depth delta: every default witness satisfies
    # Ent <= (2/delta) Energy, and the best witness lands inside
    # [0.6 * 2/delta, 2/delta]
    sw = Stopwatch(10.0)
    for delta in (1.0, 2.0, 5.0):
        m, v = geo.flat(2), geo.gaussian_well(delta)
        fam = me.default_test_family(m, v)
        for tf in fam:
            ee = me.entropy_energy(m, v, tf)
            assert ee.entropy <= (2.0 / delta) * ee.energy + 1e-6, tf.name
        wr = me.lsi_lower_bound(m, v, fam)
        assert 0.6 * (2.0 / delta) <= wr.best <= 2.0 / delta
    sw.check()


def test_02_spectral_gap_oracle():
    # the generator's first nonzero eigenvalue equals the well depth
    sw = Stopwatch(5.0)
    for delta in (1.0, 2.0, 5.0):
        m, v = geo.flat(2), geo.gaussian_well(delta)
        rep = me.spectral_gap(m, v)
        assert abs(rep.gap - delta) <= 0.02 * delta
    sw.check()


def test_03_moment_threshold_closed_form():
    # mu(e^{lam r^2}) = 1/(1 - lam) for depth 2; infinite from lam = 1 on
    sw = Stopwatch(5.0)
    m, v, _ = flat_setup(2.0)
    for lam in (0.25, 0.5, 0.9):
        rep = me.exp_moment(m, v, lam)
        assert rep.converged
        np.testing.assert_allclose(rep.value, 1.0 / (1.0 - lam), rtol=1e-6)
    for lam in (1.0, 1.5):
        rep = me.exp_moment(m, v, lam)
        assert not rep.converged and math.isinf(rep.value)
    sw.check()


def test_04_heavy_tail_counterexample():
    # density r e^{-lam sqrt(1+r^2)}: Z = 2 pi e^{-lam}(1+lam)/lam^2; the
    # squared-exponential moment diverges for every positive coefficient
    # and far-out bump witnesses grow without bound
    sw = Stopwatch(10.0)
    for lam in (0.5, 1.0, 2.0):
        rep = me.partition_mass(geo.gauss_warp(1.0, 2),
                                geo.quad_sqrt_well(1.0, lam))
        z_exact = 2.0 * math.pi * math.exp(-lam) * (1.0 + lam) / lam ** 2
        np.testing.assert_allclose(rep.z, z_exact, rtol=1e-8)
    m, v = warp_setup()
    mom = me.exp_moment(m, v, 0.01)
    assert not mom.converged and math.isinf(mom.value)
    ratios = []
    for center in (5.0, 10.0, 20.0):
        ee = me.entropy_energy(m, v, me.bump_member(center, 1.0))
        ratios.append(ee.entropy / ee.energy)
    assert ratios[0] < ratios[1] < ratios[2]
    sw.check()


def test_05_drift_inequality_fit():
    # L rho^2 <= C1 (1 + rho) - 2 kappa rho^2: flat Gaussian fits C1 = 4
    # exactly; at delta = sigma sqrt(d-1) the report flags the boundary
    sw = Stopwatch(2.0)
    m, v, sc = flat_setup(2.0)
    rep = di.fit_drift_bound(m, v, sc)
    assert abs(rep.c1 - 4.0) <= 1e-9
    assert rep.holds  # margin >= 0 across the whole fitting grid
    wm, wv = warp_setup()
    wrep = di.fit_drift_bound(wm, wv,
                              geo.ScenarioConditions(sigma=2.0, c=6.0,
                                                     delta=2.0))
    assert wrep.boundary and wrep.kappa == 0.0 and wrep.holds
    sw.check()


def test_06_exp_integral_bound_held_out():
    # E exp(delta0 (delta - delta0)/4 * int rho^2) <= C2-capped envelope:
    # constant fitted on {0.5,1}x{0.5,1}, judged on {1.5,2}x{1.5,2};
    # every held-out pair must clear -1 CI half-width (3 SE in log space)
    sw = Stopwatch(180.0)
    m, v, sc = flat_setup(2.0)
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=100000, seed=12345)
    rep = di.check_exp_integral_bound(m, v, sc, cfg, 1.0)
    held = [row for row in rep.rows if row.held_out]
    assert len(held) == 4
    for row in held:
        assert row.margin_log > -row.ci_halfwidth_log, \
            (row.r_start, row.horizon)
    assert rep.verdict == "pass"
    sw.check()


def test_07_coupling_success_fraction():
    # forced coalescence on the quadratic schedule: at least 99% of pairs
    # meet before the horizon (one-step discretization slack)
    sw = Stopwatch(120.0)
    m, v, sc = flat_setup(2.0)
    for r1, r2 in ((1.0, 3.0), (0.5, 4.0)):
        for horizon in (1.0, 5.0):
            cfg = SimConfig(step=1.0e-3, horizon=horizon, paths=10000,
                            seed=12345)
            ens = cp.simulate_comparison(m, v, sc, cfg, r1, r2)
            frac = float(np.mean(ens.coupled))
            assert frac >= 0.99, (r1, r2, horizon, frac)
    sw.check()


def test_08_girsanov_martingale():
    # constant xi = 1 on a potential-free plane: E[R] = 1 and
    # E[R^2] = e^{1/2}, both within 3 SE at N = 1e5
    sw = Stopwatch(60.0)
    m = geo.flat(2)
    v = geo.zero_potential()
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0e-12)
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=100000, seed=5150)
    ens = cp.simulate_comparison(m, v, sc, cfg, 5.0, 7.0, xi_mode="const",
                                 xi_const=1.0)
    w1 = cp.weight_moment(ens, 1.0)
    w2 = cp.weight_moment(ens, 2.0)
    assert abs(w1.value - 1.0) <= 3.0 * w1.rel_se * w1.value
    assert abs(w2.value - math.exp(0.5)) <= 3.0 * w2.rel_se * w2.value
    sw.check()


def _ou_semigroup(f, T, x, delta=2.0, n=6000, r_hi=14.0):
    # independent oracle: the radius of an OU point started at distance x
    # is Rice distributed, so P_T f(x) is a one-dimensional quadrature
    nu = x * math.exp(-delta * T)
    s2 = (1.0 - math.exp(-2.0 * delta * T)) / delta
    r = np.linspace(1e-9, r_hi, n)
    dens = (r / s2) * np.exp(-((r - nu) ** 2) / (2.0 * s2)) * i0e(r * nu / s2)
    return float(np.trapezoid(f(r) * dens, r))


def test_09_harnack_protocol_with_kernel_oracle():
    # (P_T f(y))^alpha <= P_T f^alpha(x) * envelope with the constant
    # frozen on the calibration grid; every held-out tuple must pass
    # outright, and the MC semigroup values must agree with the Rice
    # kernel quadrature within 3 SE
    sw = Stopwatch(600.0)
    m, v, sc = flat_setup(2.0)
    cfg = SimConfig(step=2.5e-4, horizon=1.0, paths=100000, seed=31415)
    summ = cp.harnack_protocol(m, v, sc, cfg)
    assert summ.verdict == "pass"
    assert len(summ.calibration) == 27 * 2
    assert len(summ.held_out) == 8 * 2
    for row in summ.calibration:
        assert row.margin_log >= -1e-9
    for row in summ.held_out:
        assert row.verdict == "pass", (row.f_name, row.r_x, row.r_y,
                                       row.horizon, row.verdict)
    np.testing.assert_allclose(summ.big_c, 0.017867, atol=5e-5)
    fs = {f.name: f for f in cp.default_harnack_functions()}
    worst_z = 0.0
    for row in summ.held_out:
        f = fs[row.f_name]
        z_y = (row.p_f_y - _ou_semigroup(f.f, row.horizon, row.r_y)) \
            / row.se_f_y
        z_x = (row.p_falpha_x
               - _ou_semigroup(lambda r: f.f(r) ** row.alpha, row.horizon,
                               row.r_x)) / row.se_falpha_x
        worst_z = max(worst_z, abs(z_y), abs(z_x))
    assert worst_z < 3.0, worst_z
    sw.check()


def test_10_holder_exponent_values():
    sw = Stopwatch(1.0)
    assert cp.holder_exponent(2.0, 2.0) == 1.5
    assert cp.holder_exponent(2.0, 1.5) == 1.5
    # the infimum 1/8 needs the joint limit alpha -> inf, p -> 1 taken
    # with alpha (p - 1) >> 1; this sample point approaches it within 1%
    val = cp.holder_exponent(1.0e6, 1.0 + 1.0e-3)
    assert abs(val - 0.125) / 0.125 < 0.01
    sw.check()


def test_11_growth_calculus_closed_forms():
    sw = Stopwatch(1.0)
    gp = ct.power_growth_pair(3.0, 1.0e-4, THETA)
    np.testing.assert_allclose(ct.growth_mean(gp, 4.0), 4.0 / 3.0, rtol=1e-12)
    np.testing.assert_allclose(ct.growth_tail_integral(gp, 1.0), 3.0,
                               rtol=1e-12)
    np.testing.assert_allclose(ct.growth_potential(gp, 1.0), 1.0 / 6.0,
                               rtol=1e-12)
    # eta = r Gamma1(r) as an identity
    for r in (0.5, 1.0, 7.0):
        np.testing.assert_allclose(r * ct.growth_mean(gp, r),
                                   r * r / 3.0, rtol=1e-12)
    for s in np.geomspace(1.0e-2, 1.0e2, 9):
        assert abs(ct.growth_mean(gp, ct.growth_mean_inverse(gp, s)) - s) \
            <= 1e-8 * (1.0 + s)
        assert abs(ct.growth_tail_integral(gp, ct.growth_tail_inverse(gp, s))
                   - s) <= 1e-8 * (1.0 + s)
    # integrable-tail verdicts
    assert ct.tail_condition_holds(gp)
    const = ct.custom_growth_pair(lambda s: 1.0 + 0.0 * s, lambda s: 0.0 * s,
                                  THETA, name="const")
    assert not ct.tail_condition_holds(const)
    sw.check()


def test_12_ultracontractive_scaling_and_chain():
    sw = Stopwatch(5.0)
    gp = ct.power_growth_pair(3.0, 1.0e-4, THETA)
    l2 = math.log(ct.ultra_bound(gp, 1.0e-2).log_value)
    l3 = math.log(ct.ultra_bound(gp, 1.0e-3).log_value)
    slope = (l3 - l2) / math.log(10.0)
    assert abs(slope - 2.0) <= 0.05 * 2.0
    # every emitted verdict is chain-monotone: ultra => super => hyper
    rank = {"yes": 2, "no": 0, "inconclusive": 1}
    verdicts = []
    m, v, sc = flat_setup(2.0)
    verdicts.append(ct.hyper_super_ultra_verdict(m, v, sc,
                                                 harnack_verdict="pass"))
    wm, wv = warp_setup()
    verdicts.append(ct.hyper_super_ultra_verdict(
        wm, wv, geo.ScenarioConditions(sigma=2.0, c=6.0, delta=2.0),
        harnack_verdict="fail"))
    pm, pv = geo.power_curv(3.0, 1.0e-4, 2), geo.power_well(3.0)
    psc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0, r0=2.0,
                                 theta=THETA)
    verdicts.append(ct.hyper_super_ultra_verdict(pm, pv, psc, gp=gp,
                                                 harnack_verdict="pass",
                                                 c45=0.0))
    assert verdicts[2].ultracontractive == "yes"
    for vd in verdicts:
        assert rank[vd.ultracontractive] <= rank[vd.supercontractive]
        assert rank[vd.supercontractive] <= rank[vd.hypercontractive]
    sw.check()


def test_13_applicability_truth_table():
    sw = Stopwatch(1.0)
    table = [
        (2.0, 0.0, 2, True, True, True),
        (2.0, 2.0, 2, False, False, False),
        (4.0, 2.0, 2, False, True, True),
        (5.0, 2.0, 2, True, True, True),
        (1.0, 1.0, 5, False, False, False),
        (4.9, 2.0, 2, True, True, True),
    ]
    for delta, sigma, d, lsi, cpl, tail in table:
        sc = geo.ScenarioConditions(sigma=sigma, c=0.0, delta=delta)
        ap = geo.applicability(sc, d)
        assert (ap.lsi_pathway, ap.coupling_pathway, ap.tail_pathway) \
            == (lsi, cpl, tail), (delta, sigma, d)
    sw.check()


def test_14_full_suite_determinism():
    scenario = sn.flat_gaussian(paths=2000)
    b1 = run_suites(scenario)
    b2 = run_suites(scenario)
    b3 = run_suites(scenario, workers=1)
    b4 = run_suites(scenario, workers=4)
    csvs = [rp.to_csv(b.reports) for b in (b1, b2, b3, b4)]
    assert csvs[0] == csvs[1] == csvs[2] == csvs[3]
    assert b1.provenance == b2.provenance == b3.provenance == b4.provenance
    assert b1.exit_status == 0
