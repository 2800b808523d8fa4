"""Run configuration loading and validation for the ``policylab`` CLI."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Mapping

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from policylab.config import Settings
from policylab.model import ExperimentConfig, Instance, make_cl_instance, validate_instance

_NESTED_BLOCKS = ("run", "instance", "experiment")


class ClInstance(BaseModel):
    """Selector for member ``index`` (1-based) of the ``k``-arm hard family."""

    model_config = ConfigDict(extra="forbid")

    k: int = Field(ge=2)
    index: int = Field(ge=1)

    @model_validator(mode="after")
    def _index_in_range(self) -> "ClInstance":
        if self.index > self.k:
            raise ValueError(f"index must lie in 1..{self.k}, got {self.index}")
        return self


class RunConfig(BaseModel):
    """Validated settings for one ``simulate`` run."""

    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    theta: list[float] | None = None
    cl_instance: ClInstance | None = None
    N: int = Field(default=1, ge=1)
    T: int | None = Field(default=None, ge=1)
    T_grid: list[int] | None = None
    rule: Literal["exploration", "thompson", "uniform"] = "exploration"
    reps: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    posterior_draws: int | None = Field(default=None, ge=1)
    prior_alpha: list[float] | None = None
    prior_beta: list[float] | None = None
    output_dir: Path | None = None
    workers: int | None = Field(default=None, ge=1)
    scheduler: Literal["synchronous", "threads", "processes"] | None = None

    @field_validator("T_grid")
    @classmethod
    def _grid_positive(cls, value: list[int] | None) -> list[int] | None:
        if value is not None:
            if not value:
                raise ValueError("T_grid must not be empty")
            if min(value) < 1:
                raise ValueError("T_grid entries must be positive")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if (self.theta is None) == (self.cl_instance is None):
            raise ValueError("exactly one of theta or cl_instance must be given")
        if self.T is None and self.T_grid is None:
            raise ValueError("either T or T_grid must be given")
        return self

    @property
    def horizons(self) -> list[int]:
        """Sorted distinct checkpoints; ``T`` joins the grid when both are set."""

        values = set(self.T_grid or [])
        if self.T is not None:
            values.add(self.T)
        return sorted(values)

    def build_instance(self) -> Instance:
        if self.cl_instance is not None:
            return make_cl_instance(self.cl_instance.k, self.cl_instance.index)
        return validate_instance(self.theta or [])

    def experiment_config(self, instance: Instance, settings: Settings) -> ExperimentConfig:
        return ExperimentConfig(
            k=instance.k,
            N=self.N,
            T=max(self.horizons),
            prior_alpha=tuple(self.prior_alpha or ()),
            prior_beta=tuple(self.prior_beta or ()),
            seed=self.seed,
            posterior_draws=self.posterior_draws or settings.posterior_draws,
        )


def load_config(config_path: str | Path) -> dict[str, Any]:
    """Load a run file in JSON or YAML format into a flat mapping.

    Keys may sit at the top level or inside ``run:``, ``instance:`` and
    ``experiment:`` blocks.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the file cannot be parsed or is not a mapping.
    """

    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {path}")

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:  # pragma: no cover - filesystem errors are rare
        raise ValueError(f"Failed to read configuration file: {path}") from exc

    suffix = path.suffix.lower()
    try:
        if suffix in {".yaml", ".yml"}:
            data = yaml.safe_load(text) or {}
        elif suffix == ".json":
            data = json.loads(text)
        else:
            raise ValueError(f"Unsupported configuration format; expected JSON or YAML: {path}")
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ValueError(f"Malformed configuration file {path}: {exc}") from exc

    if not isinstance(data, Mapping):
        raise ValueError("Configuration payload must be a mapping of keys to values")
    return _flatten(data)


def _flatten(data: Mapping[str, Any]) -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key in _NESTED_BLOCKS:
            if not isinstance(value, Mapping):
                raise ValueError(f"'{key}' block must be a mapping")
            flat.update(value)
        else:
            flat[key] = value
    return flat


def resolve_run_config(
    config_path: str | Path | None, overrides: Mapping[str, Any]
) -> RunConfig:
    """Merge a run file with command-line overrides and validate the result."""

    data = load_config(config_path) if config_path is not None else {}
    given = {key: value for key, value in overrides.items() if value is not None}
    # An instance given on the command line replaces the file's instance.
    if "theta" in given:
        data.pop("cl_instance", None)
    if "cl_instance" in given:
        data.pop("theta", None)
    data.update(given)
    return RunConfig.model_validate(data)


__all__ = ["ClInstance", "RunConfig", "load_config", "resolve_run_config"]
