import math

import numpy as np
import pytest

from warplab import geometry as geo
from warplab import measure as me
from warplab.errors import DomainError


def flat_gaussian(delta=2.0):
    return geo.flat(2), geo.gaussian_well(delta)


def warp_heavy():
    # density w e^{-V} = r exp(-lam sqrt(1+r^2)): exponential tail
    return geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(1.0, 1.0)


def test_flat_gaussian_partition_mass():
    # radial density r e^{-delta r^2/2}: radial mass 1/delta, Z = 2 pi/delta
    for delta in (1.0, 2.0, 5.0):
        m, v = flat_gaussian(delta)
        rep = me.partition_mass(m, v)
        assert rep.converged and not rep.divergent
        np.testing.assert_allclose(rep.radial_mass, 1.0 / delta, rtol=1e-10)
        np.testing.assert_allclose(rep.z, 2.0 * math.pi / delta, rtol=1e-10)


def test_heavy_tail_partition_closed_form():
    # Z = 2 pi e^{-lam} (1+lam) / lam^2
    for lam in (0.5, 1.0, 2.0):
        m = geo.gauss_warp(1.0, 2)
        v = geo.quad_sqrt_well(1.0, lam)
        rep = me.partition_mass(m, v)
        z_exact = 2.0 * math.pi * math.exp(-lam) * (1.0 + lam) / lam ** 2
        np.testing.assert_allclose(rep.z, z_exact, rtol=1e-10)
    np.testing.assert_allclose(
        me.partition_mass(geo.gauss_warp(1.0, 2),
                          geo.quad_sqrt_well(1.0, 1.0)).z,
        4.6229093991625305, rtol=1e-12)


def test_partition_mass_divergent_verdict():
    # warp opening faster than the well closes: infinite mass, no exception
    rep = me.partition_mass(geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(0.5, 1.0))
    assert rep.divergent and not rep.converged
    assert math.isinf(rep.z)


def test_exp_moment_closed_form():
    # mu(e^{lam r^2}) = (delta/2) / (delta/2 - lam) below threshold
    m, v = flat_gaussian(2.0)
    for lam in (0.25, 0.5, 0.9):
        rep = me.exp_moment(m, v, lam)
        assert rep.converged
        np.testing.assert_allclose(rep.value, 1.0 / (1.0 - lam), rtol=1e-8)


def test_exp_moment_divergence():
    m, v = flat_gaussian(2.0)
    for lam in (1.0, 1.5):
        rep = me.exp_moment(m, v, lam)
        assert not rep.converged
        assert math.isinf(rep.value)


def test_exp_moment_threshold_locates_delta_half():
    m, v = flat_gaussian(2.0)
    thr = me.exp_moment_threshold(m, v)
    assert abs(thr - 1.0) < 5e-3


def test_exp_moment_heavy_tail_diverges_immediately():
    # exponential tail: squared-exponential moment infinite for every lam > 0
    m, v = warp_heavy()
    rep = me.exp_moment(m, v, 0.01)
    assert not rep.converged
    assert math.isinf(rep.value)


def test_exp_moment_infinite_mass_raises():
    with pytest.raises(DomainError):
        me.exp_moment(geo.gauss_warp(1.0, 2), geo.quad_sqrt_well(0.5, 1.0), 0.1)


def test_spectral_gap_matches_well_depth():
    for delta in (1.0, 2.0, 5.0):
        m, v = flat_gaussian(delta)
        rep = me.spectral_gap(m, v)
        assert abs(rep.gap - delta) <= 0.02 * delta
    rep2 = me.spectral_gap(*flat_gaussian(2.0))
    np.testing.assert_allclose(rep2.gap, 2.000001679353312, rtol=1e-9)


def test_entropy_energy_nonnegative_and_finite():
    m, v = flat_gaussian(2.0)
    ee = me.entropy_energy(m, v, me.bump_member(2.0, 1.0))
    assert ee.entropy >= 0.0
    assert ee.energy > 0.0
    np.testing.assert_allclose(ee.entropy, 0.30666407974419774, rtol=1e-9)
    np.testing.assert_allclose(ee.energy, 0.7701610218219007, rtol=1e-9)


def test_entropy_bound_direction():
    # every default family member satisfies Ent <= (2/delta) Energy
    for delta in (1.0, 2.0, 5.0):
        m, v = flat_gaussian(delta)
        for tf in me.default_test_family(m, v):
            ee = me.entropy_energy(m, v, tf)
            assert ee.entropy <= (2.0 / delta) * ee.energy + 1e-6, tf.name


def test_witness_battery_brackets_true_constant():
    m, v = flat_gaussian(2.0)
    wr = me.lsi_lower_bound(m, v, me.default_test_family(m, v))
    np.testing.assert_allclose(wr.best, 0.9776232454642507, rtol=1e-9)
    assert 0.6 * (2.0 / 2.0) <= wr.best <= 2.0 / 2.0
    # members carry (name, entropy, energy, ratio) with ratio = ent/energy
    for name, ent, en, ratio in wr.members:
        assert ratio <= wr.best + 1e-12
        np.testing.assert_allclose(ratio, ent / en, rtol=1e-12)


def test_witness_bump_ratios_blow_up_on_heavy_tail():
    # far-out bumps expose the missing entropy-energy bound: the ratios
    # grow without saturating as the center moves out
    m, v = warp_heavy()
    fam = [me.bump_member(c, 1.0) for c in (5.0, 10.0, 20.0)]
    ratios = [me.entropy_energy(m, v, tf).entropy
              / me.entropy_energy(m, v, tf).energy for tf in fam]
    assert ratios[0] < ratios[1] < ratios[2]
    np.testing.assert_allclose(ratios, (2.946857, 8.605015, 21.006242),
                               rtol=1e-4)


def test_tail_class_labels():
    assert me.tail_class(*flat_gaussian(2.0)) == "gaussian-like"
    assert me.tail_class(*warp_heavy()) == "subexponential"


def test_sample_radius_moments():
    # r^2 ~ Exp(1) for delta = 2: E r^2 = 1
    m, v = flat_gaussian(2.0)
    rng = np.random.default_rng(7)
    s = me.sample_radius(m, v, 20000, rng)
    assert abs(float(np.mean(s * s)) - 1.0) < 0.03
    assert np.all(s >= 0.0)


def test_expect_against_closed_form():
    m, v = flat_gaussian(2.0)
    val = me.expect(m, v, lambda r: r ** 2)
    np.testing.assert_allclose(val, 1.0, rtol=1e-8)
