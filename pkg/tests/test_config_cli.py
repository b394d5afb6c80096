import dataclasses
import importlib.resources

import pytest

from warplab import cli
from warplab import scenarios as sn
from warplab.config import emit_config, parse_config
from warplab.errors import ConfigError
from warplab.report import CSV_HEADER

MINIMAL = """
[manifold]
name = flat

[potential]
name = gaussian_well
delta = 2.0
"""


def test_round_trip_builtins():
    for name in sorted(sn.BUILTINS):
        s = sn.builtin(name)
        assert parse_config(emit_config(s)) == s


def test_packaged_configs_match_builtins():
    root = importlib.resources.files("warplab") / "configs"
    for name in sorted(sn.BUILTINS):
        text = (root / f"{name}.cfg").read_text()
        assert parse_config(text) == sn.builtin(name)


def test_minimal_config_fills_defaults():
    s = parse_config(MINIMAL)
    assert s.manifold == "flat"
    assert s.manifold_params == {"dim": 2}
    assert s.potential_params == {"delta": 2.0}
    assert s.sim.step == 1.0e-3 and s.sim.paths == 10000
    assert s.suites == sn.SUITES
    assert s.expect_fail == ()


def test_constraint_violation_message():
    bad = MINIMAL.replace("name = flat", "name = gauss_warp\nk = -1.0")
    with pytest.raises(ConfigError, match="k must be > 0"):
        parse_config(bad)


def test_unknown_key_is_named():
    bad = MINIMAL.replace("delta = 2.0", "delta2 = 2.0")
    with pytest.raises(ConfigError, match="delta2"):
        parse_config(bad)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "\n[potato]\nx = 1\n")


def test_unknown_suite_rejected():
    with pytest.raises(ConfigError, match="unknown suite"):
        parse_config(MINIMAL + "\n[suites]\nrun = curvture\n")


def test_missing_manifold_section():
    with pytest.raises(ConfigError, match="manifold"):
        parse_config("[potential]\nname = gaussian_well\ndelta = 1.0\n")


def test_cli_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in sn.BUILTINS:
        assert name in out


def test_cli_run_builtin_measure_table(capsys):
    # predicted failures render as such and exit green
    rc = cli.main(["run", "--config", "warp_heavy_tail", "--suite", "measure"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "fail (expected)" in out
    assert "provenance:" in out


def test_cli_run_csv_stdout(capsys):
    rc = cli.main(["run", "--config", "warp_heavy_tail", "--suite", "measure",
                   "--format", "csv"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.splitlines()[0] == ",".join(CSV_HEADER)


def test_cli_run_config_file_with_outputs(tmp_path, capsys):
    s = sn.flat_gaussian(paths=200)
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text(emit_config(s))
    out_dir = tmp_path / "out"
    rc = cli.main(["run", "--config", str(cfg), "--suite", "drift",
                   "--out", str(out_dir)])
    capsys.readouterr()
    assert rc == 0
    report = out_dir / "flat_gaussian_report.csv"
    assert report.exists()
    assert report.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert (out_dir / "flat_gaussian_provenance.txt").exists()
    assert (out_dir / "flat_gaussian_drift_margins.csv").exists()


def test_cli_run_seed_override_is_deterministic(tmp_path, capsys):
    args = ["run", "--config", "warp_heavy_tail", "--suite", "measure",
            "--format", "csv", "--seed", "777"]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert cli.main(args) == 0
    second = capsys.readouterr().out
    assert first == second


def test_cli_wrong_prediction_exits_one(tmp_path, capsys):
    # scenario predicts mass_finite to fail, but it passes: exit 1
    s = dataclasses.replace(sn.flat_gaussian(paths=200),
                            expect_fail=("mass_finite",))
    cfg = tmp_path / "wrong.cfg"
    cfg.write_text(emit_config(s))
    rc = cli.main(["run", "--config", str(cfg), "--suite", "measure"])
    capsys.readouterr()
    assert rc == 1


def test_cli_missing_config_exits_two(capsys):
    rc = cli.main(["run", "--config", "no_such_scenario", "--suite", "measure"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "error:" in err


def test_cli_malformed_config_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[manifold]\nname = flat\ndim = one\n")
    rc = cli.main(["run", "--config", str(cfg), "--suite", "measure"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "error:" in err


def test_cli_sweep(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    rc = cli.main(["sweep", "--ratios", "0.8,1.2", "--out", str(out_dir)])
    capsys.readouterr()
    assert rc == 0
    text = (out_dir / "sweep.csv").read_text().splitlines()
    assert len(text) == 3
    header = text[0].split(",")
    assert header[0] == "ratio" and "hyper_evidence" in header
    row_lo = text[1].split(",")
    row_hi = text[2].split(",")
    # concentration evidence appears only above the threshold ratio
    assert row_lo[-1] == "no"
    assert row_hi[-1] == "yes"
