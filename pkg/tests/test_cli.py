from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from policylab.config import Settings
from policylab_cli.cli import _build_parser, main


def _json_stdout(capsys: pytest.CaptureFixture[str]) -> dict:
    return json.loads(capsys.readouterr().out)


def _simulate(output_dir: Path, name: str, *extra: str) -> int:
    return main(
        [
            "simulate",
            "--theta",
            "0.6,0.4,0.3",
            "--name",
            name,
            "--N",
            "3",
            "--T-grid",
            "2,4,6",
            "--rule",
            "exploration",
            "--reps",
            "12",
            "--seed",
            "5",
            "--draws",
            "200",
            "--output-dir",
            str(output_dir),
            *extra,
        ]
    )


def test_instance_command(settings: Settings, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["instance", "--k", "4", "--index", "3"]) == 0
    payload = _json_stdout(capsys)
    assert payload["theta"] == [0.5, 0.375, 0.6875, 0.25]
    assert payload["best_arm"] == 2
    assert payload["schema_version"] == "1.0"


def test_gamma_command(settings: Settings, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["gamma", "--theta", "0.9,0.6"]) == 0
    payload = _json_stdout(capsys)
    assert payload["gamma_star"] == pytest.approx(0.06740, abs=1e-5)
    assert payload["rho"] == [0.5, 0.5]
    assert payload["residuals"][0] is None


def test_gamma_command_writes_file(settings: Settings, tmp_path: Path) -> None:
    target = tmp_path / "gamma.json"
    assert main(["gamma", "--k", "3", "--index", "1", "--output", str(target)]) == 0
    assert json.loads(target.read_text(encoding="utf-8"))["best_arm"] == 0


def test_bounds_command(settings: Settings, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["bounds", "--theta", "0.9,0.6", "--T", "100"]) == 0
    payload = _json_stdout(capsys)
    assert payload["H"] == pytest.approx(1 / 0.09)
    assert payload["pinsker_holds"] is True
    assert payload["C"] == 800.0


def test_bounds_family_command(settings: Settings, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["bounds", "--cl-family", "--k", "4", "--T", "100"]) == 0
    payload = _json_stdout(capsys)
    assert payload["hardest_index"] == 1
    assert len(payload["members"]) == 4


def test_dp_command(settings: Settings, tmp_path: Path, capsys) -> None:
    policy_csv = tmp_path / "policy.csv"
    assert main(["dp", "--k", "2", "--N", "1", "--T", "2", "--policy-csv", str(policy_csv)]) == 0
    payload = _json_stdout(capsys)
    assert payload["objective"] == "welfare"
    assert payload["root_action"] == [0, 1]
    assert policy_csv.read_text(encoding="utf-8").splitlines()[0] == "t,m_0,m_1,r_0,r_1,n_0,n_1"


def test_dp_single_wave_value(settings: Settings, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["dp", "--k", "2", "--N", "1", "--T", "1"]) == 0
    assert _json_stdout(capsys)["value"] == pytest.approx(7 / 12, abs=1e-12)


def test_simulate_missing_config_exits_2(
    settings: Settings, caplog: pytest.LogCaptureFixture
) -> None:
    with caplog.at_level(logging.ERROR):
        assert main(["simulate", "--config", "missing.cfg"]) == 2
    assert "missing.cfg" in caplog.text


@pytest.mark.parametrize(
    "argv",
    [
        ["gamma", "--theta", "0.6,0.6"],
        ["gamma", "--theta", "0.9,0.6", "--k", "2", "--index", "1"],
        ["bounds", "--cl-family", "--T", "10"],
        ["instance", "--k", "3", "--index", "7"],
        ["simulate", "--theta", "0.9,0.6"],
    ],
)
def test_config_errors_exit_2(settings: Settings, argv: list[str]) -> None:
    assert main(argv) == 2


def test_runtime_errors_exit_1(settings: Settings) -> None:
    assert main(["dp", "--k", "3", "--N", "10", "--T", "10", "--state-cap", "1000"]) == 1


def test_unknown_subcommand(settings: Settings) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["plot"])
    assert excinfo.value.code == 2


def test_help_lists_every_flag(capsys: pytest.CaptureFixture[str]) -> None:
    parser = _build_parser()
    subparsers = next(
        action for action in parser._actions if action.dest == "command"
    ).choices
    for name, subparser in subparsers.items():
        with pytest.raises(SystemExit) as excinfo:
            main([name, "--help"])
        assert excinfo.value.code == 0
        text = capsys.readouterr().out
        for action in subparser._actions:
            for flag in action.option_strings:
                assert flag in text
            assert action.help


def test_simulate_outputs_are_reproducible(settings: Settings, tmp_path: Path) -> None:
    first_root, second_root = tmp_path / "first", tmp_path / "second"
    assert _simulate(first_root, "demo") == 0
    assert _simulate(second_root, "demo", "--workers", "2", "--scheduler", "threads") == 0
    first, second = first_root / "demo", second_root / "demo"
    assert (first / "simulate.csv").read_bytes() == (second / "simulate.csv").read_bytes()
    summary = json.loads((first / "summary.json").read_text(encoding="utf-8"))
    assert summary["T_grid"] == [2, 4, 6]
    assert summary["fit"] is None or summary["fit"]["exponent_se"] >= 0
    assert (first / "manifest.json").exists()
    header = (first / "simulate.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == (
        "rule,k,N,T,reps,regret_hat,regret_se,err_prob_hat,exponent_point,"
        "share_best_mean,share_best_se,seed"
    )


def test_simulate_repeat_is_byte_identical(settings: Settings, tmp_path: Path) -> None:
    assert _simulate(tmp_path, "again") == 0
    csv_bytes = (tmp_path / "again" / "simulate.csv").read_bytes()
    summary_bytes = (tmp_path / "again" / "summary.json").read_bytes()
    assert _simulate(tmp_path, "again") == 0
    assert (tmp_path / "again" / "simulate.csv").read_bytes() == csv_bytes
    assert (tmp_path / "again" / "summary.json").read_bytes() == summary_bytes


def test_simulate_from_config_file(settings: Settings, tmp_path: Path) -> None:
    config = tmp_path / "run.yaml"
    config.write_text(
        "run:\n  name: from-file\n  seed: 2\n"
        "instance:\n  cl_instance: {k: 3, index: 2}\n"
        "experiment:\n  rule: uniform\n  N: 3\n  T: 4\n  reps: 5\n",
        encoding="utf-8",
    )
    assert main(["simulate", "--config", str(config)]) == 0
    assert (settings.output_dir / "from-file" / "simulate.csv").exists()


def test_report_joins_predictions(settings: Settings, tmp_path: Path) -> None:
    assert _simulate(tmp_path, "joined") == 0
    assert main(["report", "--run", "joined", "--output-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "joined" / "report.json").read_text(encoding="utf-8"))
    assert [row["T"] for row in report["rows"]] == [2, 4, 6]
    assert report["predictions"]["gamma_star"] > 0
    assert (tmp_path / "joined" / "report.csv").exists()


def test_report_missing_run(settings: Settings, tmp_path: Path) -> None:
    assert main(["report", "--run", "absent", "--output-dir", str(tmp_path)]) == 2


def test_report_rejects_run_without_outputs(settings: Settings, tmp_path: Path) -> None:
    (tmp_path / "empty").mkdir()
    assert main(["report", "--run", "empty", "--output-dir", str(tmp_path)]) == 2


def test_simulate_rerun_drops_stale_report(settings: Settings, tmp_path: Path) -> None:
    assert _simulate(tmp_path, "rerun") == 0
    assert main(["report", "--run", "rerun", "--output-dir", str(tmp_path)]) == 0
    assert _simulate(tmp_path, "rerun") == 0
    assert not (tmp_path / "rerun" / "report.json").exists()
    assert (tmp_path / "rerun" / "manifest.json").exists()


def test_package_version_is_a_string() -> None:
    import policylab

    assert isinstance(policylab.__version__, str)
    with pytest.raises(AttributeError):
        policylab.no_such_attribute  # noqa: B018
