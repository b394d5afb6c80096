import math

import numpy as np
import pytest

from warplab import contractivity as ct
from warplab import geometry as geo
from warplab.errors import DomainError

SQRT2P1 = 1.0 + math.sqrt(2.0)
THETA = 0.9 / SQRT2P1


def power_pair(theta=THETA, eps=1.0e-4):
    return ct.power_growth_pair(3.0, eps, theta)


def test_power_growth_closed_forms():
    # alpha = 3: phi(1) = 1/6, Gamma1(r) = r/3, Gamma2(r) = 3/r
    gp = power_pair()
    np.testing.assert_allclose(ct.growth_potential(gp, 1.0), 1.0 / 6.0,
                               rtol=1e-12)
    np.testing.assert_allclose(ct.growth_mean(gp, 1.0), 1.0 / 3.0, rtol=1e-12)
    np.testing.assert_allclose(ct.growth_mean(gp, 4.0), 4.0 / 3.0, rtol=1e-12)
    np.testing.assert_allclose(ct.growth_tail_integral(gp, 1.0), 3.0,
                               rtol=1e-12)


def test_growth_inverses_compose_to_identity():
    gp = power_pair()
    for s in np.geomspace(1.0e-3, 1.0e3, 25):
        r1 = ct.growth_mean_inverse(gp, s)
        assert abs(ct.growth_mean(gp, r1) - s) <= 1e-8 * (1.0 + s)
        r2 = ct.growth_tail_inverse(gp, s)
        assert abs(ct.growth_tail_integral(gp, r2) - s) <= 1e-8 * (1.0 + s)
    assert ct.growth_mean_inverse(gp, 4.0 / 3.0) == pytest.approx(4.0,
                                                                  rel=1e-10)
    assert ct.growth_tail_inverse(gp, 3.0) == pytest.approx(1.0, rel=1e-10)


def test_eta_is_convex():
    # eta(r) = r Gamma1(r); convexity is what the decay argument leans on
    gp = power_pair()
    r = np.linspace(0.1, 40.0, 400)
    eta = r * np.array([ct.growth_mean(gp, float(x)) for x in r])
    second = np.diff(eta, 2)
    assert np.all(second >= -1e-10)


def test_tail_condition_verdicts():
    assert ct.tail_condition_holds(power_pair())
    const = ct.custom_growth_pair(lambda s: 1.0 + 0.0 * s, lambda s: 0.0 * s,
                                  0.3, name="const")
    # constant growth never accumulates an integrable tail
    assert not ct.tail_condition_holds(const)
    assert math.isinf(ct.growth_tail_integral(const, 1.0))


def test_c_lambda_pins():
    gp = power_pair()
    np.testing.assert_allclose(ct.c_lambda(gp, 1.0e-6), 6.994112549939992e-17,
                               rtol=1e-9)
    big = ct.custom_growth_pair(lambda s: 1.0e6 * s ** 2, lambda s: 0.0 * s,
                                0.3, primitive=lambda r: 1.0e6 * r ** 3 / 3.0,
                                name="huge")
    np.testing.assert_allclose(ct.c_lambda(big, 0.1), 6.994114995576592e-08,
                               rtol=1e-9)
    # log variant agrees where the plain value is representable
    lv = ct.c_lambda_log(gp, 1.0e-6)
    assert lv <= math.log(6.994112549939992e-17) + 1e-6


def test_growth_domination_direction():
    ok = ct.check_growth_domination(power_pair(0.9 / SQRT2P1), 2)
    assert ok.holds
    assert ok.c == 0.0
    np.testing.assert_allclose(ok.coeff_available, 0.010487117921223947,
                               rtol=1e-9)
    assert ok.coeff_available >= ok.coeff_required

    bad = ct.check_growth_domination(power_pair(0.4 / SQRT2P1), 2)
    assert not bad.holds
    np.testing.assert_allclose(bad.c, 75.73602496098653, rtol=1e-6)
    np.testing.assert_allclose(bad.coeff_available, 0.007995641617315856,
                               rtol=1e-9)


def test_growth_domination_zero_psi():
    # no curvature growth to dominate: the fitted constant collapses to 0
    gp = ct.custom_growth_pair(lambda s: np.asarray(s) ** 2 / 3.0,
                               lambda s: 0.0 * np.asarray(s), THETA,
                               primitive=lambda r: r ** 3 / 9.0, name="psi0")
    rep = ct.check_growth_domination(gp, 2)
    assert rep.holds
    assert rep.c == 0.0


def test_sup_moment_plateau_case():
    gp = power_pair()
    rep = ct.sup_moment_bound(gp, 0.05, 0.5, math.exp(0.2), 4.0, 0.0)
    assert rep.case == "plateau"
    np.testing.assert_allclose(rep.log_bound, 0.5167412005627057, rtol=1e-9)
    assert rep.log_bound == rep.log_plateau


def test_sup_moment_tail_case():
    # enormous initial value: the transient tail term takes over
    gp = power_pair()
    rep = ct.sup_moment_bound(gp, 0.5, 0.1, 1.0e9, 4.0, 0.0)
    assert rep.case == "tail"
    assert rep.log_bound == rep.log_tail
    np.testing.assert_allclose(rep.log_bound, 30.0, rtol=1e-12)


def test_ultra_bound_pins_and_slope():
    gp = power_pair()
    np.testing.assert_allclose(ct.ultra_bound(gp, 1.0e3).log_value, 1.001006,
                               rtol=1e-6)
    ub2 = ct.ultra_bound(gp, 1.0e-2)
    np.testing.assert_allclose(ub2.log_value, 60101.0, rtol=1e-6)
    np.testing.assert_allclose(ub2.g1_inv, 300.0, rtol=1e-6)
    np.testing.assert_allclose(ub2.g2_inv, 300.0, rtol=1e-6)
    # log-log slope vs 1/t approaches (alpha+1)/(alpha-1) = 2 for alpha = 3
    l2 = math.log(ct.ultra_bound(gp, 1.0e-2).log_value)
    l3 = math.log(ct.ultra_bound(gp, 1.0e-3).log_value)
    slope = (l3 - l2) / math.log(10.0)
    assert abs(slope - 2.0) <= 0.05 * 2.0
    assert ct.power_law_exponent(3.0) == 2.0


def test_decay_shape_value():
    np.testing.assert_allclose(ct.decay_shape(power_pair(), 2.0),
                               4.0 / 3.0, rtol=1e-9)


def test_growth_pair_evidence():
    ev = ct.growth_pair_evidence(power_pair())
    assert ev.phi_increasing and ev.phi_unbounded_trend and ev.tail_condition


def test_h_ode_constant_finite_and_monotone():
    gp = power_pair()
    c_small = ct.h_ode_constant(gp, 0.05, 4.0, 0.0)
    c_large = ct.h_ode_constant(gp, 0.5, 4.0, 0.0)
    assert 0.0 <= c_small < math.inf
    assert 0.0 <= c_large < math.inf
    # adding coupling slack can only raise the constant
    assert ct.h_ode_constant(gp, 0.05, 4.0, 1.0) >= c_small


def test_verdict_flat_gaussian():
    m, v = geo.flat(2), geo.gaussian_well(2.0)
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=2.0)
    vd = ct.hyper_super_ultra_verdict(m, v, sc, harnack_verdict="pass")
    assert (vd.hypercontractive, vd.supercontractive,
            vd.ultracontractive) == ("yes", "no", "no")
    assert vd.lam_hyper == 0.9
    assert math.isfinite(vd.hyper_moment)
    assert any("diverges" in n for n in vd.notes)


def test_verdict_heavy_tail():
    m, v = geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(1.0, 1.0)
    sc = geo.ScenarioConditions(sigma=2.0, c=6.0, delta=2.0)
    vd = ct.hyper_super_ultra_verdict(m, v, sc, harnack_verdict="fail")
    assert (vd.hypercontractive, vd.supercontractive,
            vd.ultracontractive) == ("no", "no", "no")
    assert math.isinf(vd.hyper_moment)


def test_verdict_power_ultra():
    m, v = geo.power_curv(3.0, 1.0e-4, 2), geo.power_well(3.0)
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0, r0=2.0,
                                theta=THETA)
    vd = ct.hyper_super_ultra_verdict(m, v, sc, gp=power_pair(),
                                      harnack_verdict="pass", c45=0.0)
    assert (vd.hypercontractive, vd.supercontractive,
            vd.ultracontractive) == ("yes", "yes", "yes")
    assert vd.tail_condition is True
    assert all(ok for (_, _, ok) in vd.moment_grid)
    assert len(vd.sup_bounds) == 15
    assert all(math.isfinite(b) for (_, _, b) in vd.sup_bounds)


def test_verdict_chain_is_monotone():
    # ultra implies super implies hyper in every emitted verdict
    rank = {"yes": 2, "no": 0, "inconclusive": 1}
    cases = []
    m, v = geo.flat(2), geo.gaussian_well(2.0)
    cases.append(ct.hyper_super_ultra_verdict(
        m, v, geo.ScenarioConditions(sigma=0.0, c=0.0, delta=2.0),
        harnack_verdict="pass"))
    m, v = geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(1.0, 1.0)
    cases.append(ct.hyper_super_ultra_verdict(
        m, v, geo.ScenarioConditions(sigma=2.0, c=6.0, delta=2.0),
        harnack_verdict="fail"))
    m, v = geo.power_curv(3.0, 1.0e-4, 2), geo.power_well(3.0)
    cases.append(ct.hyper_super_ultra_verdict(
        m, v, geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0, r0=2.0,
                                     theta=THETA),
        gp=power_pair(), harnack_verdict="pass", c45=0.0))
    for vd in cases:
        assert rank[vd.ultracontractive] <= rank[vd.supercontractive]
        assert rank[vd.supercontractive] <= rank[vd.hypercontractive]


def test_integrators():
    res = ct.integrate_improper(lambda r: -r)
    assert res.require_converged("e^-r") == pytest.approx(1.0, rel=1e-8)
    val = ct.integrate(lambda r: -r * r, None, 0.0, 10.0)
    assert val.require_converged("gauss") == pytest.approx(
        math.sqrt(math.pi) / 2.0, rel=1e-8)


def test_inverse_monotone_brackets():
    f = lambda x: x ** 3
    assert ct.inverse_monotone(f, 27.0) == pytest.approx(3.0, rel=1e-10)
    g = lambda x: 1.0 / (1.0 + x)
    assert ct.inverse_monotone(g, 0.25, increasing=False) == pytest.approx(
        3.0, rel=1e-10)


def test_power_pair_validation():
    with pytest.raises(DomainError):
        ct.power_growth_pair(1.0, 1.0e-4, THETA)
    with pytest.raises(DomainError):
        ct.power_growth_pair(3.0, -1.0, THETA)
