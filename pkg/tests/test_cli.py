import csv
import json
import subprocess
import sys

import pytest

from bootperc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_counts(capsys):
    code, doc, _ = run(capsys, "counts", "--d", "2", "--r", "2", "--t", "2")
    assert code == 0 and doc["m"] == 8 and doc["g"] == 16
    code, doc, _ = run(capsys, "counts", "--d", "3", "--r", "2", "--t", "2")
    assert doc["m"] == 18 and doc["l"] == 12 and doc["m_modified"] == 13
    code, doc, _ = run(capsys, "counts", "--d", "2", "--r", "3", "--t", "2")
    assert doc["regime"] == "subcritical" and doc["m_subcritical"] == 4


def test_counts_usage_error(capsys):
    code, doc, err = run(capsys, "counts", "--d", "2", "--r", "5", "--t", "1")
    assert code == 2 and doc is None and len(err.strip().splitlines()) == 1


def test_malformed_flags_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["identities", "--d-max", "x", "--k-max", "2"])
    assert exc.value.code == 2


def test_identities(capsys):
    code, doc, _ = run(capsys, "identities", "--d-max", "6", "--k-max", "8")
    assert code == 0 and doc["ok"] and doc["failures"] == []
    code, doc, _ = run(capsys, "identities", "--d-max", "2", "--k-max", "3")
    assert code == 0 and doc["ok"]


def test_canonical(capsys):
    code, doc, _ = run(capsys, "canonical", "--d", "2", "--r", "2", "--t", "2")
    assert doc["count"] == 4 and all(len(s["sites"]) == 8 for s in doc["sets"])
    code, doc, _ = run(capsys, "canonical", "--d", "2", "--r", "2", "--t", "2", "--semi")
    assert doc["count"] == 16


def test_extremal(capsys):
    code, doc, _ = run(capsys, "extremal", "--d", "2", "--r", "2", "--t", "2")
    assert code == 0 and doc["ex"] == 8 and doc["entries"][0]["count"] == 16
    assert doc["semi_canonical"]["match"]
    code, doc, _ = run(capsys, "extremal", "--d", "2", "--r", "2", "--rule", "modified", "--t", "2")
    assert doc["ex"] == 5 and doc["entries"][0]["count"] == 2
    code, doc, _ = run(capsys, "extremal", "--d", "2", "--r", "2", "--t", "0")
    assert doc["ex"] == 1


def test_extremal_budget_exit(capsys):
    code, doc, err = run(capsys, "extremal", "--d", "3", "--r", "2", "--t", "2", "--node-cap", "5")
    assert code == 3 and doc is None and "budget" in err


def test_simulate_writes_csv(capsys, tmp_path):
    out = tmp_path / "trials.csv"
    code, doc, _ = run(capsys, "simulate", "--d", "2", "--n", "16", "--r", "2", "--q", "0.05",
                       "--trials", "25", "--seed", "3", "--out", str(out))
    assert code == 0 and sum(doc["empirical_T"].values()) == 25
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["trial", "T", "F"] and len(rows) == 26
    assert doc["manifest"]["seed"] == 3 and doc["manifest"]["subcommand"] == "simulate"


def test_simulate_q_zero(capsys):
    code, doc, _ = run(capsys, "simulate", "--d", "2", "--n", "8", "--r", "2", "--q", "0", "--trials", "5", "--seed", "1")
    assert doc["empirical_T"] == {"0": 5}


def test_missing_seed_is_echoed(capsys):
    code, doc, _ = run(capsys, "simulate", "--d", "2", "--n", "8", "--r", "2", "--q", "0.1", "--trials", "3")
    assert isinstance(doc["seed"], int) and doc["manifest"]["seed"] == doc["seed"]


def test_invalid_plan_exit_two(capsys):
    code, _, _ = run(capsys, "simulate", "--d", "2", "--n", "8", "--r", "2", "--q", "2", "--seed", "1")
    assert code == 2
    code, _, _ = run(capsys, "subcritical", "--d", "2", "--n", "8", "--r", "2", "--q", "0.1", "--seed", "1")
    assert code == 2
    code, _, _ = run(capsys, "poisson", "--d", "2", "--n", "8", "--r", "2", "--seed", "1")
    assert code == 2


def test_poisson_and_subcritical(capsys):
    code, doc, _ = run(capsys, "poisson", "--d", "2", "--n", "20", "--r", "2", "--lambda", "0.7",
                       "--trials", "200", "--seed", "4")
    assert code == 0 and doc["lambda_exact"] == pytest.approx(0.7) and doc["identity_violations"] == 0
    code, doc, _ = run(capsys, "subcritical", "--d", "2", "--n", "20", "--r", "3", "--q", "0.3",
                       "--trials", "20", "--seed", "4")
    assert code == 0 and doc["fraction_T_infinite"] > 0.5


def test_snapshot_roundtrip(capsys, tmp_path):
    path = tmp_path / "snap.json"
    code, doc, _ = run(capsys, "snapshot", "write", "--d", "2", "--n", "9", "--q", "0.2", "--seed", "7", "--file", str(path))
    assert code == 0 and path.exists()
    written = doc["uninfected"]
    code, doc, _ = run(capsys, "snapshot", "read", "--file", str(path))
    assert code == 0 and doc["uninfected"] == written and doc["kind"] == "torus"
    code, _, _ = run(capsys, "snapshot", "read", "--file", str(tmp_path / "missing.json"))
    assert code == 2


def test_env_default_jobs(monkeypatch):
    monkeypatch.setenv("BOOTPERC_JOBS", "3")
    from bootperc.cli import build_parser

    args = build_parser().parse_args(["simulate", "--d", "2", "--n", "8", "--r", "2", "--q", "0.1"])
    assert args.jobs == 3


def test_module_entry_point_prints_one_document():
    proc = subprocess.run([sys.executable, "-m", "bootperc", "counts", "--d", "2", "--r", "2", "--t", "1"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["m"] == 4
