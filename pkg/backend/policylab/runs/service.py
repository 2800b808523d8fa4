"""Named runs under the output root: creation, reuse and lookup."""

from __future__ import annotations

import logging
import re
from pathlib import Path

from .paths import RunPaths

LOGGER = logging.getLogger(__name__)

RUN_NAME = re.compile(r"[a-z0-9][a-z0-9_-]*")


class RunManager:
    """Owns the run directories below ``base_dir``.

    A run is *completed* once ``simulate`` has written both its summary and
    its per-horizon table; ``report`` only reads completed runs.
    """

    def __init__(self, base_dir: Path) -> None:
        self.base_dir = base_dir.resolve()
        self.base_dir.mkdir(parents=True, exist_ok=True)

    def run_root(self, name: str) -> Path:
        """Directory for run ``name``; rejects names that are not slugs."""

        if not RUN_NAME.fullmatch(name):
            raise ValueError(
                f"Run name '{name}' may only contain lowercase letters, numbers, "
                "hyphens, or underscores",
            )
        root = (self.base_dir / name).resolve()
        if root.parent != self.base_dir:
            raise ValueError(f"Run '{name}' resolves outside {self.base_dir}")
        return root

    def initialize(self, name: str) -> RunPaths:
        """Prepare run ``name`` for a fresh simulation.

        Outputs and the manifest of an earlier run with the same name are
        removed so that a later report never mixes two simulations.
        """

        paths = RunPaths(self.run_root(name))
        paths.ensure()
        stale = paths.existing_outputs()
        if paths.manifest_json.exists():
            stale.append(paths.manifest_json)
        for path in stale:
            path.unlink()
        if stale:
            LOGGER.info(
                "Replacing run '%s': removed %s", name, ", ".join(p.name for p in stale)
            )
        return paths

    def resolve(self, name: str) -> RunPaths:
        """Existing run directory, raising ``FileNotFoundError`` if absent."""

        paths = RunPaths(self.run_root(name))
        if not paths.root.is_dir():
            raise FileNotFoundError(f"Run '{name}' not found under {self.base_dir}")
        return paths

    def resolve_completed(self, name: str) -> RunPaths:
        """Run ``name`` with its simulate outputs present."""

        paths = self.resolve(name)
        if not self._is_completed(paths):
            known = ", ".join(self.runs()) or "none"
            raise FileNotFoundError(
                f"Run '{name}' has no simulate outputs in {paths.root} "
                f"(completed runs: {known})"
            )
        return paths

    def runs(self) -> list[str]:
        """Sorted names of the completed runs."""

        return sorted(
            child.name
            for child in self.base_dir.iterdir()
            if child.is_dir()
            and RUN_NAME.fullmatch(child.name)
            and self._is_completed(RunPaths(child))
        )

    @staticmethod
    def _is_completed(paths: RunPaths) -> bool:
        return paths.summary_json.is_file() and paths.simulate_csv.is_file()


__all__ = ["RunManager"]
