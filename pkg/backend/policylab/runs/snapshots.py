"""Reproduction manifests for finished runs."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping

from git import InvalidGitRepositoryError, NoSuchPathError, Repo

from .paths import RunPaths

LOGGER = logging.getLogger(__name__)

DEPENDENCY_MANIFESTS = (Path("pyproject.toml"), Path("poetry.lock"))


@dataclass(slots=True)
class ManifestRecord:
    """Details about a written manifest."""

    run_name: str
    manifest_path: Path
    git_hash: str | None
    dependencies: list[dict[str, str]]
    outputs: list[dict[str, str]]
    created_at: datetime

    def as_dict(self) -> dict[str, object]:
        return {
            "run_name": self.run_name,
            "manifest_path": str(self.manifest_path),
            "git_hash": self.git_hash,
            "dependencies": self.dependencies,
            "outputs": self.outputs,
            "created_at": self.created_at.isoformat(),
        }


class ManifestWriter:
    """Record code revision, dependency hashes and output hashes of a run.

    The manifest carries a timestamp, so unlike the other run files it is not
    byte-stable across repeated runs.
    """

    def __init__(self, repo_root: Path) -> None:
        self.repo_root = repo_root

    def write(
        self,
        paths: RunPaths,
        run_name: str,
        config: Mapping[str, Any],
        command: str,
    ) -> ManifestRecord:
        timestamp = datetime.now(timezone.utc)
        dependencies = self._dependency_manifests()
        outputs = self._output_manifests(paths.existing_outputs(), paths.root)
        git_hash = self._git_revision()

        manifest = {
            "run_name": run_name,
            "command": command,
            "created_at": timestamp.isoformat(),
            "git": {"hash": git_hash},
            "config": dict(config),
            "dependencies": dependencies,
            "outputs": outputs,
        }
        paths.manifest_json.write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
        )
        LOGGER.info("Manifest written to %s", paths.manifest_json)
        return ManifestRecord(
            run_name=run_name,
            manifest_path=paths.manifest_json,
            git_hash=git_hash,
            dependencies=dependencies,
            outputs=outputs,
            created_at=timestamp,
        )

    def _git_revision(self) -> str | None:
        try:
            repo = Repo(self.repo_root, search_parent_directories=True)
            return repo.head.commit.hexsha
        except (InvalidGitRepositoryError, NoSuchPathError, ValueError):
            # ValueError covers a repository without commits.
            return None

    def _dependency_manifests(self) -> list[dict[str, str]]:
        manifests: list[dict[str, str]] = []
        for candidate in DEPENDENCY_MANIFESTS:
            path = (self.repo_root / candidate).resolve()
            if path.exists():
                manifests.append({"path": str(candidate), "sha256": hash_file(path)})
        return manifests

    @staticmethod
    def _output_manifests(files: Iterable[Path], root: Path) -> list[dict[str, str]]:
        return [
            {"path": str(path.relative_to(root)), "sha256": hash_file(path)}
            for path in sorted(files)
        ]


def hash_file(path: Path) -> str:
    """SHA-256 hex digest of ``path``, empty for missing files."""

    if not path.is_file():
        return ""
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1024 * 1024), b""):
            digest.update(chunk)
    return digest.hexdigest()


__all__ = ["ManifestRecord", "ManifestWriter", "hash_file"]
