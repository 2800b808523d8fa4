"""Runtime settings for the policy choice laboratory."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Environment-driven defaults shared by the library and the CLI."""

    model_config = SettingsConfigDict(
        env_prefix="POLICYLAB_", env_file=".env", extra="ignore"
    )

    output_dir: Path = Path("./outputs").resolve()
    repo_root: Path = Path(__file__).resolve().parents[2]
    log_level: str = "INFO"
    state_cap: int = Field(default=10_000_000, ge=1)
    posterior_draws: int = Field(default=10_000, ge=1)
    workers: int = Field(default=1, ge=1)
    scheduler: Literal["synchronous", "threads", "processes"] = "processes"
    block_size: int = Field(default=500, ge=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached instance of :class:`Settings`."""

    settings = Settings()
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    return settings


__all__ = ["Settings", "get_settings"]
