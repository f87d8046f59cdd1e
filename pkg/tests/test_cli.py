import csv
import json

import pytest

from samplinglab.algorithms import ConfigurationError
from samplinglab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, LabConfig, main, parse_m_grid, UsageError


def read_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# generated: ")
    return list(csv.DictReader(lines[1:]))


def write_config(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(dict(kw, out=str(tmp_path / "out"))), encoding="utf-8")
    return str(p)


def test_config_round_trip():
    cfg = LabConfig(d=2, alpha=3.0, seed=11, m_grid=[2, 4, 8], checks=["khintchine"])
    assert LabConfig.from_json(cfg.to_json()) == cfg


def test_config_rejects_unknown_keys_and_ids():
    with pytest.raises(ConfigurationError):
        LabConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigurationError):
        LabConfig(dictionary="hats_v9")
    with pytest.raises(ConfigurationError):
        LabConfig(checks=["nope"])


def test_parse_m_grid():
    assert parse_m_grid("4:64:geometric") == [4, 8, 16, 32, 64]
    with pytest.raises(UsageError):
        parse_m_grid("4:64:linear")


def test_verify_default_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "verify.csv")
    assert rows and all(r["passed"] == "true" for r in rows)


def test_verify_zero_tolerance_fails(tmp_path):
    cfg = write_config(tmp_path, tolerance=0.0, checks=["hat_sum", "multihat"])
    assert main(["verify", "--config", cfg]) == EXIT_FAIL


def test_verify_khintchine_rows(tmp_path):
    cfg = write_config(tmp_path, checks=["khintchine"])
    assert main(["verify", "--config", cfg]) == EXIT_OK
    assert len(read_rows(tmp_path / "out" / "verify.csv")) == 24


def test_hardness_zero_integral(tmp_path):
    code = main(["hardness", "--out", str(tmp_path), "--problem", "integral", "--algorithm", "zero",
                 "--m-grid", "1:4:geometric"])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "hardness_integral_mc_zero.csv")
    assert [r["m"] for r in rows] == ["1", "2", "4"] and all(r["pass"] == "true" for r in rows)
    doc = json.loads((tmp_path / "hardness_integral_mc_zero_m4.json").read_text())
    assert doc["passed"] and doc["m"] == 4


def test_hardness_midpoint_uniform(tmp_path):
    code = main(["hardness", "--out", str(tmp_path), "--problem", "uniform", "--algorithm", "midpoint",
                 "--m-grid", "1:8:geometric"])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "hardness_uniform_mc_midpoint.csv")
    # d = 1, alpha = 1, gamma = 0.5
    assert all(float(r["exponent"]) == pytest.approx(1 / 1.5) for r in rows)


def test_unregistered_algorithm_is_usage_error(tmp_path):
    assert main(["hardness", "--out", str(tmp_path), "--algorithm", "oracle"]) == EXIT_USAGE


def test_bad_config_file_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["verify", "--config", str(bad)]) == EXIT_USAGE


def test_argparse_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_rates_table_single_row(tmp_path):
    cfg = write_config(tmp_path, rates_d=[1], rates_alpha=[1.0], rates_theta=[0.0], rates_ell_star=[3])
    assert main(["rates-table", "--config", cfg]) == EXIT_OK
    rows = read_rows(tmp_path / "out" / "rates_table.csv")
    uni = [r for r in rows if r["problem"] == "uniform"]
    assert len(uni) == 1 and float(uni[0]["lower"]) == 0.5 == float(uni[0]["upper"])


def test_rates_table_default_grid(tmp_path):
    assert main(["rates-table", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "rates_table.csv")
    for r in rows:
        assert float(r["lower"]) <= float(r["upper"])
        if r["problem"] == "l2":
            assert float(r["upper"]) <= 1.5
        if r["problem"] == "uniform" and r["ell_star"] == "inf":
            assert float(r["upper"]) == 0.0
