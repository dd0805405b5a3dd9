"""Command-line interface: end-to-end runs, determinism, exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from holofield import cli


def _write_config(tmp_path: Path, name: str, **overrides) -> str:
    cfg = dict(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _read(path: Path) -> bytes:
    return path.read_bytes()


def test_sample_writes_samples_and_diagnostics(tmp_path):
    cfg = _write_config(tmp_path, "c.json", samples=200, burnin=100, thin=2)
    out = tmp_path / "out"
    rc = cli.main(["sample", "--config", cfg, "--out", str(out)])
    assert rc == 0
    lines = (out / "samples.ndjson").read_text().splitlines()
    assert len(lines) == 200
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["config"]["samples"] == 200
    assert diag["diagnostics"][0]["steps"] > 0


def test_estimate_runs_and_reports(tmp_path):
    cfg = _write_config(
        tmp_path,
        "c.json",
        samples=2000,
        burnin=200,
        thin=2,
        points=[
            {"re": [0.3], "im": [0.1], "conj": False},
            {"re": [0.7], "im": [-0.1], "conj": True},
        ],
        laplace={"center": [0.5], "radius": 0.4, "height": 1.0},
    )
    out = tmp_path / "est"
    rc = cli.main(["estimate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    data = json.loads((out / "estimates.json").read_text())
    kinds = [row["kind"] for row in data["estimates"]]
    assert kinds == ["moment", "laplace"]
    moment = data["estimates"][0]
    assert set(moment["value"]) == {"re", "im"}
    assert moment["n_samples"] == 2000


def test_oracle_subcommand_matches_frozen_count(tmp_path):
    cfg = _write_config(tmp_path, "c.json", oracle_functionals=["count"])
    out = tmp_path / "oracle"
    rc = cli.main(["oracle", "--config", cfg, "--out", str(out)])
    assert rc == 0
    data = json.loads((out / "oracle.json").read_text())
    row = data["oracle"][0]
    assert row["functional"] == "count"
    assert row["value"] == pytest.approx(0.3432880692563192, abs=1e-9)
    assert row["tail_bound"] < 1e-8


def test_verify_subcommand_all_pass(tmp_path):
    cfg = _write_config(
        tmp_path,
        "c.json",
        tests=["conditions", "fkg", "dominance"],
        trials=100,
        verify_samples=3000,
        burnin=300,
        thin=2,
    )
    out = tmp_path / "verify"
    rc = cli.main(["verify", "--config", cfg, "--out", str(out)])
    assert rc == 0
    data = json.loads((out / "verify.json").read_text())
    assert all(row["passed"] for row in data["reports"])


def test_verify_exit_code_on_failure(tmp_path, monkeypatch):
    """A failing verification must map to exit code 3."""
    from holofield.analysis import TestReport

    def fake_fkg(*args, **kwargs):
        return TestReport("fkg", False, -9.0, -3.0, {})

    monkeypatch.setattr("holofield.analysis.fkg_test", fake_fkg)
    cfg = _write_config(
        tmp_path, "c.json", tests=["fkg"], verify_samples=500, burnin=50, thin=1
    )
    rc = cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")])
    assert rc == 3


def test_unknown_config_key_exits_one(tmp_path):
    cfg = _write_config(tmp_path, "c.json", not_a_key=5)
    rc = cli.main(["sample", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1


def test_oracle_refusal_exits_one(tmp_path):
    """A window too large for the truncation order maps to exit code 1."""
    cfg = _write_config(tmp_path, "c.json", window=[[0.0, 6.0]], nmax=12)
    rc = cli.main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1


def test_sample_byte_identical_across_runs(tmp_path):
    cfg = _write_config(tmp_path, "c.json", samples=300, burnin=100, thin=2)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sample", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["sample", "--config", cfg, "--out", str(out2)]) == 0
    assert _read(out1 / "samples.ndjson") == _read(out2 / "samples.ndjson")
    assert _read(out1 / "diagnostics.json") == _read(out2 / "diagnostics.json")


def test_sample_byte_identical_across_worker_counts(tmp_path):
    cfg = _write_config(
        tmp_path, "c.json", samples=200, burnin=100, thin=2, chains=4
    )
    out1, out2 = tmp_path / "w1", tmp_path / "w3"
    rc1 = cli.main(["sample", "--config", cfg, "--out", str(out1), "--workers", "1"])
    rc2 = cli.main(["sample", "--config", cfg, "--out", str(out2), "--workers", "3"])
    assert rc1 == rc2 == 0
    assert _read(out1 / "samples.ndjson") == _read(out2 / "samples.ndjson")


def test_estimate_byte_identical_across_worker_counts(tmp_path):
    cfg = _write_config(
        tmp_path,
        "c.json",
        samples=1000,
        burnin=100,
        thin=2,
        chains=4,
        points=[{"re": [0.5], "im": [0.0], "conj": False}],
    )
    out1, out2 = tmp_path / "e1", tmp_path / "e4"
    rc1 = cli.main(["estimate", "--config", cfg, "--out", str(out1), "--workers", "1"])
    rc2 = cli.main(["estimate", "--config", cfg, "--out", str(out2), "--workers", "4"])
    assert rc1 == rc2 == 0
    assert _read(out1 / "estimates.json") == _read(out2 / "estimates.json")


def test_oracle_byte_identical_across_runs(tmp_path):
    cfg = _write_config(tmp_path, "c.json", oracle_functionals=["count", "laplace"],
                        laplace={"center": [0.5], "radius": 0.4, "height": 1.0})
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli.main(["oracle", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["oracle", "--config", cfg, "--out", str(out2)]) == 0
    assert _read(out1 / "oracle.json") == _read(out2 / "oracle.json")


def test_seed_override_changes_output(tmp_path):
    cfg = _write_config(tmp_path, "c.json", samples=200, burnin=100, thin=2)
    out1, out2 = tmp_path / "s0", tmp_path / "s1"
    cli.main(["sample", "--config", cfg, "--out", str(out1)])
    cli.main(["sample", "--config", cfg, "--out", str(out2), "--seed", "99"])
    assert _read(out1 / "samples.ndjson") != _read(out2 / "samples.ndjson")


def test_report_renders_table(tmp_path, capsys):
    cfg = _write_config(tmp_path, "c.json", samples=500, burnin=100, thin=2,
                        points=[{"re": [0.5], "im": [0.0], "conj": False}])
    out = tmp_path / "rep"
    assert cli.main(["estimate", "--config", cfg, "--out", str(out)]) == 0
    assert cli.main(["report", "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "moment" in captured.out
    assert (out / "report.csv").exists()


def test_default_config_used_when_absent(tmp_path):
    rc = cli.main(["sample", "--out", str(tmp_path / "d")])
    assert rc == 0
