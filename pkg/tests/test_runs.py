from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from policylab.runs import ManifestWriter, RunManager, RunPaths
from policylab.runs.snapshots import hash_file


def test_run_manager_creates_directory(tmp_path: Path) -> None:
    manager = RunManager(tmp_path / "outputs")
    paths = manager.initialize("static-exponent")
    assert paths.root.is_dir()
    assert paths.simulate_csv == paths.root / "simulate.csv"
    assert manager.resolve("static-exponent").root == paths.root


@pytest.mark.parametrize("name", ["Upper", "../escape", "", "-leading", "with space"])
def test_run_manager_rejects_bad_names(tmp_path: Path, name: str) -> None:
    with pytest.raises(ValueError):
        RunManager(tmp_path).run_root(name)


def test_run_manager_resolve_missing(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        RunManager(tmp_path).resolve("never-ran")


def test_existing_outputs_skip_manifest(tmp_path: Path) -> None:
    paths = RunPaths(tmp_path)
    paths.simulate_csv.write_text("a\n", encoding="utf-8")
    paths.manifest_json.write_text("{}", encoding="utf-8")
    assert paths.existing_outputs() == [paths.simulate_csv]
    assert set(paths.as_dict()) >= {"simulate", "summary", "manifest"}


def test_manifest_records_hashes(tmp_path: Path) -> None:
    repo_root = tmp_path / "repo"
    repo_root.mkdir()
    (repo_root / "pyproject.toml").write_text("[tool.poetry]\n", encoding="utf-8")
    paths = RunManager(tmp_path / "outputs").initialize("demo")
    paths.simulate_csv.write_text("rule,k\nuniform,2\n", encoding="utf-8")

    record = ManifestWriter(repo_root).write(paths, "demo", {"seed": 1}, command="simulate")

    manifest = json.loads(paths.manifest_json.read_text(encoding="utf-8"))
    assert record.git_hash is None
    assert manifest["git"] == {"hash": None}
    assert manifest["config"] == {"seed": 1}
    assert manifest["outputs"] == [
        {"path": "simulate.csv", "sha256": hash_file(paths.simulate_csv)}
    ]
    assert manifest["dependencies"][0]["path"] == "pyproject.toml"
    assert record.as_dict()["run_name"] == "demo"


def test_hash_file_missing(tmp_path: Path) -> None:
    assert hash_file(tmp_path / "absent") == ""


def _complete(paths: RunPaths) -> None:
    paths.simulate_csv.write_text("T\n2\n", encoding="utf-8")
    paths.summary_json.write_text("{}", encoding="utf-8")


def test_initialize_clears_previous_outputs(
    tmp_path: Path, caplog: pytest.LogCaptureFixture
) -> None:
    manager = RunManager(tmp_path)
    paths = manager.initialize("repeat")
    _complete(paths)
    paths.report_json.write_text("{}", encoding="utf-8")
    paths.manifest_json.write_text("{}", encoding="utf-8")

    with caplog.at_level(logging.INFO, logger="policylab.runs.service"):
        again = manager.initialize("repeat")

    assert again.root == paths.root
    assert again.existing_outputs() == []
    assert not again.manifest_json.exists()
    assert "report.json" in caplog.text


def test_resolve_completed_requires_simulate_outputs(tmp_path: Path) -> None:
    manager = RunManager(tmp_path)
    _complete(manager.initialize("done"))
    manager.initialize("started")

    assert manager.resolve_completed("done").root == tmp_path.resolve() / "done"
    with pytest.raises(FileNotFoundError, match="completed runs: done"):
        manager.resolve_completed("started")
    with pytest.raises(FileNotFoundError):
        manager.resolve_completed("never-ran")


def test_runs_lists_completed_names(tmp_path: Path) -> None:
    manager = RunManager(tmp_path)
    for name in ("beta", "alpha"):
        _complete(manager.initialize(name))
    manager.initialize("partial")
    (tmp_path / "Not-A-Run").mkdir()
    (tmp_path / "stray.txt").write_text("", encoding="utf-8")
    assert manager.runs() == ["alpha", "beta"]
