"""Run directory layout."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(slots=True)
class RunPaths:
    """Files written by one named run."""

    root: Path

    def ensure(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)

    def files(self) -> dict[str, Path]:
        """Return mapping of logical names to output files."""

        return {
            "simulate": self.simulate_csv,
            "summary": self.summary_json,
            "policy": self.policy_csv,
            "report_csv": self.report_csv,
            "report": self.report_json,
            "config": self.config_json,
            "manifest": self.manifest_json,
        }

    @property
    def simulate_csv(self) -> Path:
        return self.root / "simulate.csv"

    @property
    def summary_json(self) -> Path:
        return self.root / "summary.json"

    @property
    def policy_csv(self) -> Path:
        return self.root / "policy.csv"

    @property
    def report_csv(self) -> Path:
        return self.root / "report.csv"

    @property
    def report_json(self) -> Path:
        return self.root / "report.json"

    @property
    def config_json(self) -> Path:
        return self.root / "config.json"

    @property
    def manifest_json(self) -> Path:
        return self.root / "manifest.json"

    def existing_outputs(self) -> list[Path]:
        """Output files present on disk, manifest excluded."""

        return [
            path
            for name, path in self.files().items()
            if name != "manifest" and path.exists()
        ]

    def as_dict(self) -> dict[str, str]:
        return {name: str(path) for name, path in self.files().items()}


__all__ = ["RunPaths"]
