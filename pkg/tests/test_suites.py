import numpy as np
import pytest

from warplab import report as rp
from warplab import scenarios as sn
from warplab.errors import ConfigError
from warplab.suites import run_suites

FLAT_CORE_IDS = [
    "ricci_quadratic", "hessian_gap",
    "applicability_lsi", "applicability_coupling", "applicability_tail",
    "mass_finite", "exp_moment", "moment_threshold", "spectral_gap",
    "lsi_entropy_bound", "lsi_lower_bound",
    "drift_fit", "exp_integral_bound", "nonexplosion",
]


def test_flat_core_suites_green():
    b = run_suites(sn.flat_gaussian(paths=500),
                   suites=("curvature", "measure", "drift"))
    assert [r.check_id for r in b.reports] == FLAT_CORE_IDS
    assert all(r.verdict == "pass" for r in b.reports)
    assert b.exit_status == 0
    assert "drift_margins" in b.plots


def test_suite_order_is_canonical():
    # request order does not leak into report order
    b1 = run_suites(sn.flat_gaussian(paths=500), suites=("measure", "curvature"))
    b2 = run_suites(sn.flat_gaussian(paths=500), suites=("curvature", "measure"))
    assert [r.check_id for r in b1.reports] == [r.check_id for r in b2.reports]


def test_unknown_suite_name_rejected():
    with pytest.raises(ConfigError):
        run_suites(sn.flat_gaussian(paths=100), suites=("curvture",))


def test_warp_drift_refusal_row():
    # the square-integral bound needs a positive gap; at the boundary the
    # check refuses, and the scenario counts that refusal as the expected
    # failure
    b = run_suites(sn.warp_heavy_tail(paths=300), suites=("drift",))
    by_id = {r.check_id: r for r in b.reports}
    row = by_id["exp_integral_bound"]
    assert row.verdict == "fail"
    assert row.fitted_constants == (("refused", 1.0),)
    assert by_id["drift_fit"].fitted_constants == (("c1", 4.0), ("kappa", 0.0))
    assert b.exit_status == 0


def test_deterministic_csv_and_worker_invariance():
    sc = sn.flat_gaussian(paths=500)
    suites = ("curvature", "measure", "drift")
    b1 = run_suites(sc, suites=suites, workers=1)
    b2 = run_suites(sc, suites=suites, workers=4)
    b3 = run_suites(sc, suites=suites, workers=1)
    c1, c2, c3 = (rp.to_csv(b.reports) for b in (b1, b2, b3))
    assert c1 == c2 == c3
    assert b1.provenance == b2.provenance


def test_seed_override_moves_mc_rows_only():
    sc = sn.flat_gaussian(paths=500)
    b1 = run_suites(sc, suites=("drift",))
    b2 = run_suites(sc, suites=("drift",), seed=999)
    by1 = {r.check_id: r for r in b1.reports}
    by2 = {r.check_id: r for r in b2.reports}
    # deterministic fit identical, sampled bound moves
    assert by1["drift_fit"].lhs == by2["drift_fit"].lhs
    assert by1["exp_integral_bound"].lhs != by2["exp_integral_bound"].lhs
    assert by2["exp_integral_bound"].verdict == "pass"


def test_contractivity_reruns_protocol_when_needed():
    # contractivity verdicts must not depend on which other suites ran;
    # paths=2000 keeps the internally rerun protocol conclusive
    sc = sn.flat_gaussian(paths=2000)
    alone = run_suites(sc, suites=("contractivity",))
    paired = run_suites(sc, suites=("harnack", "contractivity"))
    pick = lambda b: {r.check_id: r.verdict for r in b.reports
                      if r.check_id.startswith("verdict_")}
    assert pick(alone) == pick(paired)
    assert pick(alone)["verdict_hyper"] == "pass"
    # predicted higher-rung failures
    assert pick(alone)["verdict_super"] == "fail"
    assert pick(alone)["verdict_ultra"] == "fail"
    assert alone.exit_status == 0


def test_provenance_header_lists_scenario_and_suites():
    b = run_suites(sn.flat_gaussian(paths=500), suites=("curvature",))
    text = "\n".join(b.provenance)
    assert "flat_gaussian" in text
    assert "curvature" in text
