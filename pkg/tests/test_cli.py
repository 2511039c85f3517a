"""Tests for the command-line interface: exit codes, outputs, manifests,
and byte-determinism of CSV output."""

import json

import pytest

from genplasma.cli import main


def run_cli(args):
    return main(list(args))


def test_znorm_uniform_passes(capsys):
    assert run_cli(["znorm", "--N1", "4", "--N2", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["results"]["Z"] - 1.0) < 1e-10
    assert doc["manifest"]["command"] == "znorm"
    assert "wall_time_s" in doc["manifest"]


def test_znorm_tolerance_miss_exits_one(capsys):
    # (4,2) has a few-ulp deviation from 1, so an absurd tolerance must miss
    code = run_cli(["znorm", "--N1", "4", "--N2", "2", "--tol", "1e-16"])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["manifest"]["exit_code"] == 1


def test_usage_error_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        run_cli(["znorm", "--nonsense", "1"])
    assert exc.value.code == 2


def test_usage_error_missing_parameter(capsys):
    assert run_cli(["znorm"]) == 2
    assert "missing required parameter" in capsys.readouterr().err


def test_identities_small_suite(tmp_path):
    out = tmp_path / "identities.json"
    code = run_cli(
        ["identities", "--thm", "vandermonde,family", "--N", "2,4", "--trials",
         "3", "--seed", "5", "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["failed"] == 0 and doc["total"] == 12
    manifest = json.loads((tmp_path / "identities.json.manifest.json").read_text())
    assert manifest["exit_code"] == 0


def test_skew_check_sweep(capsys):
    assert run_cli(["skew-check", "--max-order", "6"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(c["pass"] for c in doc["results"]["configs"])


def test_corr_finite_with_checks_and_csv_determinism(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = [
        "corr-finite", "--N1", "2", "--N2", "1",
        "--points", "0.4;2.0", "--points", "0.1,1.3;",
        "--check-oracle", "--check-zeta",
    ]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header.startswith("k1,k2,x_1,x_2,y_1,rho")


def test_corr_bulk(capsys):
    assert run_cli(
        ["corr-bulk", "--rhoR", "1.0", "--rhoG", "1.0", "--points", "0.3,0.0;"]
    ) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["rows"][0]["rho"] > 0


def test_two_point_compare(capsys):
    code = run_cli(
        ["two-point", "--pair", "rg", "--rhoR", "1.0", "--rhoG", "0.5",
         "--xmax", "1.0", "--n", "7", "--compare"]
    )
    assert code == 0


def test_sumrule_rr(capsys):
    code = run_cli(
        ["sumrule", "--rule", "rr", "--rhoR", "1.0", "--rhoG", "1.0",
         "--X", "80"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["results"]["lhs"] + 1.0) < 1e-3


def test_mc_writes_samples_and_histogram(tmp_path):
    out = tmp_path / "samples.csv"
    code = run_cli(
        ["mc", "--N1", "2", "--N2", "1", "--steps", "6000", "--burn-in",
         "1000", "--chains", "2", "--seed", "3", "--pair", "rg",
         "--out", str(out)]
    )
    assert code == 0
    assert out.exists()
    assert (tmp_path / "samples.csv.hist.csv").exists()
    assert (tmp_path / "samples.csv.manifest.json").exists()
    assert out.read_text().startswith("chain,step,theta_0,theta_1,phi_0")


def test_oracle_compare(capsys):
    code = run_cli(
        ["oracle-compare", "--N1", "2", "--N2", "1", "--trials", "3",
         "--seed", "1"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["worst_rel"] <= 1e-8


def test_diag_tail(capsys):
    code = run_cli(
        ["diag-tail", "--pair", "rg", "--rhoR", "1.0", "--rhoG", "1.0",
         "--window", "15,40"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert "fit" in doc["results"] and "predicted" in doc["results"]


def test_config_file_provides_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N1": 2, "N2": 1}))
    assert run_cli(["znorm", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["N1"] == 2
