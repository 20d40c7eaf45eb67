import json
import subprocess
import sys

import pytest

from bayes_betti.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_full_pipeline(workdir, capsys):
    assert main(["generate", "--r", "2", "--n", "120", "--seed", "3", "-o", "cloud.csv"]) == 0
    assert main(["diagram", "cloud.csv", "-o", "diag.csv"]) == 0
    assert (workdir / "diag.meta.json").exists()
    assert main(["fit", "diag.csv", "--burn-in", "1000", "--samples", "800", "--lifetimes-out", "lt.csv", "-o", "chain.json"]) == 0
    chain = json.loads((workdir / "chain.json").read_text())
    assert chain["samples"] == 800 and chain["data"]["level"] == 0
    assert chain["data"]["removed_at_max"] == 1 and len(chain["data"]["lifetimes"]) == 119
    assert main(["estimate", "chain.json", "-o", "summary.json"]) == 0
    summary = json.loads((workdir / "summary.json").read_text())
    assert summary["beta_hat"] == 2 and summary["beta_check"] == 2
    capsys.readouterr()
    assert main(["report", "summary.json"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "source,level,i,S_i" and len(lines) > 1


def test_fit_from_lifetime_file_is_seeded(workdir):
    main(["generate", "--n", "60", "-o", "c.csv"])
    main(["diagram", "c.csv", "-o", "d.csv"])
    args = ["--burn-in", "200", "--samples", "100", "--seed", "5"]
    assert main(["fit", "d.csv", *args, "--lifetimes-out", "l.csv", "-o", "a.json"]) == 0
    assert main(["fit", "l.csv", *args, "-o", "b.json"]) == 0
    a, b = (json.loads((workdir / f).read_text()) for f in ("a.json", "b.json"))
    assert a == b


def test_missing_input_exits_nonzero(workdir, capsys):
    assert main(["diagram", "nope.csv", "-o", "d.csv"]) == 1
    assert "error" in capsys.readouterr().err


def test_estimate_rejects_foreign_json(workdir, capsys):
    (workdir / "x.json").write_text("{}")
    assert main(["estimate", "x.json"]) == 1


def test_experiment_subcommand(workdir, capsys, monkeypatch):
    monkeypatch.setenv("BAYES_BETTI_SEED", "11")
    cfg = {"r": [1], "n": [60], "s": 2, "chain": {"burn_in": 200, "samples": 200}}
    (workdir / "exp.json").write_text(json.dumps(cfg))
    assert main(["experiment", "exp.json", "--output-dir", "out"]) == 0
    assert "er_hat" in capsys.readouterr().out
    saved = json.loads((workdir / "out" / "config.json").read_text())
    assert saved["base_seed"] == 11
    assert (workdir / "out" / "error_table.csv").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bayes_betti", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
