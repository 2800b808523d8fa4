"""JSON and CSV writers with byte-stable formatting."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import pandas as pd
from pydantic import BaseModel

from policylab.dp import DPSolution
from policylab.harness import RegretEstimate
from policylab.schemas import SIMULATE_COLUMNS, estimate_row

_LOGGER = logging.getLogger(__name__)

# 17 significant digits round-trip every double.
CSV_FLOAT_FORMAT = "%.17g"


def dumps_json(payload: BaseModel) -> str:
    """Serialise ``payload``; floats use the shortest repr that round-trips."""

    return json.dumps(payload.model_dump(mode="json"), indent=2) + "\n"


def emit_json(payload: BaseModel, path: Path | None = None) -> None:
    """Write ``payload`` to ``path``, or to standard output when no path is given."""

    text = dumps_json(payload)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    _LOGGER.info("Wrote %s", path)


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    _LOGGER.info("Wrote %s (%d rows)", path, len(frame))


def simulate_frame(estimates: Sequence[RegretEstimate]) -> pd.DataFrame:
    """One row per horizon, columns in ``SIMULATE_COLUMNS`` order."""

    rows = [estimate_row(estimate) for estimate in sorted(estimates, key=lambda e: e.T)]
    return pd.DataFrame(rows, columns=list(SIMULATE_COLUMNS))


def policy_frame(solution: DPSolution, k: int) -> pd.DataFrame:
    """Optimal action per reached state, sorted by ``(t, m, r)``."""

    columns = (
        ["t"]
        + [f"m_{arm}" for arm in range(k)]
        + [f"r_{arm}" for arm in range(k)]
        + [f"n_{arm}" for arm in range(k)]
    )
    rows = sorted(
        [state.t, *state.m, *state.r, *action] for state, action in solution.policy.items()
    )
    return pd.DataFrame(rows, columns=columns)


__all__ = [
    "CSV_FLOAT_FORMAT",
    "dumps_json",
    "emit_json",
    "write_csv",
    "simulate_frame",
    "policy_frame",
]
