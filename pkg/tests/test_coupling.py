import math

import numpy as np
import pytest

from warplab import coupling as cp
from warplab import geometry as geo
from warplab.diffusion import SimConfig
from warplab.errors import ApplicabilityError, DomainError

SQRT2P1 = 1.0 + math.sqrt(2.0)


def flat_setup(delta=2.0):
    m = geo.flat(2)
    v = geo.gaussian_well(delta)
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=delta)
    return m, v, sc


def test_holder_exponent_closed_values():
    assert cp.holder_exponent(2.0, 2.0) == 1.5
    assert cp.holder_exponent(2.0, 1.5) == 1.5
    with pytest.raises(DomainError):
        cp.holder_exponent(1.0, 2.0)
    with pytest.raises(DomainError):
        cp.holder_exponent(2.0, 1.0)


def test_holder_exponent_limit():
    # joint limit alpha -> inf, p -> 1 with alpha (p-1) >> 1 approaches 1/8
    val = cp.holder_exponent(1.0e6, 1.0 + 1.0e-3)
    np.testing.assert_allclose(val, 0.12525037550062496, rtol=1e-12)
    assert abs(val - 0.125) / 0.125 < 0.01


def test_index_form_bound_values():
    # flat space: zero curvature costs nothing
    assert cp.index_form_bound(0.0, 3, 1.0) == 0.0
    np.testing.assert_allclose(cp.index_form_bound(1.0, 2, 2.0),
                               1.5231883119115297, rtol=1e-12)
    # monotone in the curvature bound and in the separation
    assert cp.index_form_bound(2.0, 2, 2.0) > cp.index_form_bound(1.0, 2, 2.0)
    assert cp.index_form_bound(1.0, 2, 3.0) > cp.index_form_bound(1.0, 2, 2.0)
    with pytest.raises(DomainError):
        cp.index_form_bound(-1.0, 2, 2.0)


def test_exp_martingale_bound_ordering():
    lhs, rhs = cp.exp_martingale_bound(0.5, 2.0, 1.0, 1.0)
    np.testing.assert_allclose(lhs, math.exp(-0.125), rtol=1e-12)
    np.testing.assert_allclose(rhs, 1.0, rtol=1e-12)
    for beta in (0.5, 1.0, 2.0, 3.0):
        for p in (1.1, 1.5, 2.0, 4.0):
            a, b = cp.exp_martingale_bound(beta, p, 1.0, 2.0)
            assert a <= b * (1.0 + 1e-12)


def test_pair_constant_gaussian_is_zero():
    # V' is exactly linear: delta rho + V'(x+rho) - V'(x) == 0
    _, v, sc = flat_setup()
    assert cp.fit_pair_constant(v, sc, "quad") == 0.0


def test_quad_coupling_succeeds_and_dominates():
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=2000, seed=2024)
    ens = cp.simulate_comparison(m, v, sc, cfg, 1.0, 3.0)
    assert float(np.mean(ens.coupled)) == 1.0
    assert float(np.max(ens.dom_max)) <= 1e-9
    assert np.all(ens.rho_terminal[ens.coupled] == 0.0)


def test_quad_coupling_time_closed_form():
    # sigma = 0 makes the separation deterministic:
    # rho' = -delta rho - rho0/T, so tau = ln(1 + delta T)/delta exactly
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=1000, seed=11)
    ens = cp.simulate_comparison(m, v, sc, cfg, 1.0, 3.0)
    tau = ens.tau[ens.coupled]
    t_star = math.log(1.0 + 2.0) / 2.0
    assert float(np.std(tau)) < 1e-12
    assert abs(float(np.mean(tau)) - t_star) <= 2.0 * cfg.step


def test_quad_schedule_refuses_below_threshold():
    m = geo.gauss_warp(1.0, 2)
    v = geo.quad_sqrt_well(1.0, 1.0)
    sc = geo.ScenarioConditions(sigma=2.0, c=6.0, delta=2.0)
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=100, seed=1)
    with pytest.raises(ApplicabilityError):
        cp.simulate_comparison(m, v, sc, cfg, 1.0, 3.0)


def test_growth_coupling_succeeds():
    theta = 0.9 / SQRT2P1
    m = geo.power_curv(3.0, 1.0e-4, 2)
    v = geo.power_well(3.0)
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0, r0=2.0,
                                theta=theta)
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=500, seed=3)
    ens = cp.simulate_comparison(m, v, sc, cfg, 1.0, 3.0, schedule="growth",
                                 phi_alpha=3.0, psi_eps=1.0e-4,
                                 psi_alpha=3.0, c45=0.0)
    assert float(np.mean(ens.coupled)) == 1.0
    assert float(np.max(ens.dom_max)) <= 1e-9


def test_comparison_deterministic_and_prefix():
    m, v, sc = flat_setup()
    c1 = SimConfig(step=1.0e-3, horizon=1.0, paths=300, seed=5)
    c2 = SimConfig(step=1.0e-3, horizon=1.0, paths=600, seed=5)
    e1 = cp.simulate_comparison(m, v, sc, c1, 1.0, 3.0)
    e2 = cp.simulate_comparison(m, v, sc, c1, 1.0, 3.0)
    e3 = cp.simulate_comparison(m, v, sc, c2, 1.0, 3.0)
    assert np.array_equal(e1.log_weight, e2.log_weight)
    assert np.array_equal(e1.log_weight, e3.log_weight[:300])
    assert np.array_equal(e1.tau, e3.tau[:300])


def test_girsanov_weight_is_martingale():
    # zero potential, constant xi = 1, T = 1:
    # E[R] = 1 and E[R^2] = e^{1/2}, both within 3 SE
    m = geo.flat(2)
    v = geo.zero_potential()
    sc = geo.ScenarioConditions(sigma=0.0, c=0.0, delta=1.0e-12)
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=20000, seed=5150)
    ens = cp.simulate_comparison(m, v, sc, cfg, 5.0, 7.0, xi_mode="const",
                                 xi_const=1.0)
    w1 = cp.weight_moment(ens, 1.0)
    w2 = cp.weight_moment(ens, 2.0)
    assert abs(w1.value - 1.0) <= 3.0 * w1.rel_se * w1.value
    assert abs(w2.value - math.exp(0.5)) <= 3.0 * w2.rel_se * w2.value
    # log weights come back per path
    lw = cp.girsanov_weight(ens)
    assert lw.shape == (20000,)
    np.testing.assert_allclose(float(np.mean(lw)), -0.25, atol=0.02)


def test_weight_moment_reports_ess():
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=2000, seed=2024)
    ens = cp.simulate_comparison(m, v, sc, cfg, 1.0, 3.0)
    wm = cp.weight_moment(ens, 2.0)
    assert wm.q == 2.0
    assert wm.value > 0.0 and wm.ess > 1.0
    np.testing.assert_allclose(wm.log_value, math.log(wm.value), rtol=1e-12)


def test_harnack_check_held_out_pass():
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=2000, seed=12345)
    f = cp.default_harnack_functions()[0]
    rep = cp.harnack_check(m, v, sc, cfg, f, 2.0, 1.0, 1.6, 1.0)
    assert rep.verdict == "pass"
    assert rep.held_out and not rep.paired
    assert rep.margin_log > 3.0 * rep.se_log
    np.testing.assert_allclose(rep.big_c, 0.012449934529691033, rtol=1e-9)
    # the inequality itself, in plain terms
    assert rep.lhs <= rep.rhs


def test_harnack_paired_start_never_fails():
    # x == y compares E[f]^alpha to E[f^alpha] on one shared ensemble:
    # Jensen makes the empirical margin nonnegative path-by-path
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=1000, seed=8)
    f = cp.default_harnack_functions()[1]
    rep = cp.harnack_check(m, v, sc, cfg, f, 2.0, 1.2, 1.2, 1.0)
    assert rep.paired
    assert rep.margin_log >= 0.0
    assert rep.verdict == "pass"


def test_harnack_chain_check_consistency():
    m, v, sc = flat_setup()
    cfg = SimConfig(step=1.0e-3, horizon=1.0, paths=1000, seed=11)
    f = cp.default_harnack_functions()[0]
    ch = cp.harnack_chain_check(m, v, sc, cfg, f, 2.0, 1.0, 1.6, 1.0)
    assert ch.verdict == "pass"
    assert ch.lhs <= ch.rhs
    np.testing.assert_allclose(ch.margin_log, math.log(ch.rhs / ch.lhs),
                               rtol=1e-9)
    assert ch.ess > 100.0


def test_default_harnack_functions_positive():
    fs = cp.default_harnack_functions()
    assert [f.name for f in fs] == ["one_plus_gauss", "two_plus_sin_bump"]
    r = np.linspace(0.0, 20.0, 200)
    for f in fs:
        vals = f.f(r)
        assert np.all(vals > 0.0)
        assert np.all(np.isfinite(vals))
