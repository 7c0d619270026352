from __future__ import annotations

import json

from soliton.cli import build_parser, main, resolve_config
from soliton.runner import read_csv


def _summary(capsys) -> dict:
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_oracle_check(tmp_path, capsys) -> None:
    assert main(["oracle-check", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "oracle.csv")
    assert len(rows) == 10
    assert all(float(row["max_residual"]) < 1e-9 for row in rows)
    assert json.loads((tmp_path / "config.json").read_text())["command"] == "oracle-check"
    assert _summary(capsys)["exit_code"] == 0


def test_scan_writes_atlas(tmp_path) -> None:
    argv = [
        "scan",
        "--n", "4",
        "--axis", "alpha", "0.5", "1.0",
        "--axis", "beta", "1.0", "1.5",
        "--fix", "gamma=0",
        "--resolution", "2",
        "--threads", "1",
        "--out", str(tmp_path),
    ]  # fmt: skip
    assert main(argv) == 0
    lines = (tmp_path / "atlas.csv").read_text().splitlines()
    assert lines[0] == "alpha,beta,class,horizon_t,defect"
    assert len(lines) == 5


def test_integrate_writes_trajectory(tmp_path, capsys) -> None:
    argv = ["integrate", "--fixed", "0", "0", "0", "--horizon", "2", "--out", str(tmp_path)]
    assert main(argv) == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert list(rows[0]) == ["t", "xi", "L1", "L2", "L3", "R1", "R2", "R3"]
    ts = [float(row["t"]) for row in rows]
    assert ts == sorted(ts)
    assert 0.0 < ts[-1] <= 2.0
    summary = _summary(capsys)["summary"]
    assert summary["t"] == ts[-1]


def test_kahler_count(tmp_path, capsys) -> None:
    argv = ["kahler", "count", "--n", "2", "--q1", "2", "--q2", "3", "--out", str(tmp_path)]
    assert main(argv) == 0
    assert _summary(capsys)["summary"]["count"] == 2


def test_kahler_profile(tmp_path, capsys) -> None:
    argv = ["kahler", "profile", "--start", "vanishing", "--C", "0", "--out", str(tmp_path)]
    assert main(argv) == 0
    payload = json.loads((tmp_path / "profile.json").read_text())
    assert payload["case"] == "cp2"
    assert _summary(capsys)["summary"]["case"] == "cp2"


def test_limsol_sweep(tmp_path) -> None:
    argv = [
        "kahler", "limsol-sweep",
        "--n", "2",
        "--q-lo", "1.02",
        "--q-hi", "1.05",
        "--resolution", "2",
        "--threads", "1",
        "--out", str(tmp_path),
    ]  # fmt: skip
    assert main(argv) == 0
    rows = read_csv(tmp_path / "limsol.csv")
    assert [row["n"] for row in rows] == ["2", "2"]
    assert all(float(row["limsol"]) < 0.1 for row in rows)


def test_config_file_overrides_flags(tmp_path) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"resolution": 3, "options": {"name": "s2xs2"}}))
    out = tmp_path / "out"
    argv = ["dump", "--name", "hyperbolic", "--config", str(config), "--out", str(out)]
    assert main(argv) == 0
    assert not (out / "hyperbolic.csv").exists()
    assert len(read_csv(out / "s2xs2.csv")) == 3


def test_lambda_defaults() -> None:
    parser = build_parser()
    shoot = resolve_config(parser.parse_args(["shoot", "sol", "--fixed", "0", "0", "0"]))
    assert shoot.germ.lam == 1.0
    assert shoot.lam_value == 1.0
    classify = resolve_config(parser.parse_args(["classify", "--fixed", "0", "0", "0"]))
    assert classify.germ.lam == -1.0
    explicit = resolve_config(
        parser.parse_args(["classify", "--lambda", "-4", "--fixed", "0", "0", "0"])
    )
    assert explicit.germ.lam == -4.0


def test_malformed_configuration_exits_2(tmp_path) -> None:
    assert main(["dump", "--name", "s2xs2", "--resolution", "1", "--out", str(tmp_path)]) == 2
    assert main(["classify", "--bolt", "3", "0.1", "--out", str(tmp_path)]) == 2
    assert main(["classify", "--bolt", "2.5", "0.1", "0.2", "--out", str(tmp_path)]) == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["oracle-check", "--config", str(broken), "--out", str(tmp_path)]) == 2


def test_missing_inputs_exit_2(tmp_path) -> None:
    assert main(["classify", "--out", str(tmp_path)]) == 2


def test_trace_reports_the_einstein_defect(tmp_path, capsys) -> None:
    argv = [
        "trace",
        "--n", "3",
        "--alpha-lo", "0.05",
        "--alpha-hi", "0.1",
        "--resolution", "2",
        "--beta-bracket", "0.5", "3.0",
        "--xtol", "0.01",
        "--out", str(tmp_path),
    ]  # fmt: skip
    assert main(argv) == 0
    rows = read_csv(tmp_path / "trace.csv")
    assert list(rows[0]) == ["alpha", "beta_max", "flagged", "einstein_defect", "einstein_gap"]
    assert [float(row["alpha"]) for row in rows] == [0.1, 0.05]
    summary = _summary(capsys)["summary"]
    assert summary["flagged"] == 0
    assert summary["einstein_defect"] == float(rows[-1]["einstein_defect"])
    assert abs(summary["einstein_gap"]) < 0.2
