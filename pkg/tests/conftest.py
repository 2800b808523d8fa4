"""Shared fixtures for the policylab test-suite."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

import pytest

from policylab.config import Settings, get_settings
from policylab.model import Instance, validate_instance


@pytest.fixture
def settings(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Iterator[Settings]:
    """Settings pointing at a temporary output directory."""

    monkeypatch.setenv("POLICYLAB_OUTPUT_DIR", str(tmp_path / "outputs"))
    monkeypatch.setenv("POLICYLAB_WORKERS", "1")
    monkeypatch.setenv("POLICYLAB_POSTERIOR_DRAWS", "500")
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture
def two_arm() -> Instance:
    return validate_instance([0.9, 0.6])


@pytest.fixture
def three_arm() -> Instance:
    return validate_instance([0.7, 0.5, 0.3])
