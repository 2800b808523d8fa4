"""Pydantic schemas for command-line payloads."""

from __future__ import annotations

import math
from typing import Any, Iterable

from pydantic import BaseModel, ConfigDict, Field

from .dp import DPSolution
from .harness import ExponentFit, RegretEstimate
from .ldp import ComplexityReport, FamilyReport, GammaSolution
from .model import Instance

SCHEMA_VERSION = "1.0"

SIMULATE_COLUMNS = (
    "rule",
    "k",
    "N",
    "T",
    "reps",
    "regret_hat",
    "regret_se",
    "err_prob_hat",
    "exponent_point",
    "share_best_mean",
    "share_best_se",
    "seed",
)


def _finite(values: Iterable[float]) -> list[float | None]:
    return [None if math.isnan(value) else value for value in values]


class VersionedPayload(BaseModel):
    """Base class adding the ``schema_version`` field."""

    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION


class InstancePayload(VersionedPayload):
    theta: list[float]
    best_arm: int
    k: int
    index: int | None = None

    @classmethod
    def from_instance(cls, instance: Instance, index: int | None = None) -> "InstancePayload":
        return cls(
            theta=list(instance.theta), best_arm=instance.best_arm, k=instance.k, index=index
        )


class GammaPayload(VersionedPayload):
    """Optimal allocation with per-arm slack; the best arm's residual is ``null``."""

    theta: list[float]
    gamma_star: float
    rho: list[float]
    residuals: list[float | None]
    best_arm: int
    label: str

    @classmethod
    def from_solution(cls, instance: Instance, solution: GammaSolution) -> "GammaPayload":
        return cls(
            theta=list(instance.theta),
            gamma_star=solution.gamma_star,
            rho=list(solution.rho),
            residuals=_finite(solution.residuals),
            best_arm=solution.best_arm,
            label=solution.label,
        )


class BoundsPayload(VersionedPayload):
    theta: list[float]
    k: int
    T: int
    H: float
    pinsker_bound: float
    gamma_star: float
    cl_bound_log: float
    exploration_rate: float
    capped_rate: float
    rate_ratio: float
    rho: list[float]
    C: float
    bound_constant: float
    pinsker_holds: bool
    cap_below_rate: bool
    label: str

    @classmethod
    def from_report(cls, instance: Instance, report: ComplexityReport) -> "BoundsPayload":
        return cls(
            theta=list(instance.theta),
            k=report.k,
            T=report.T,
            H=report.H,
            pinsker_bound=report.pinsker_bound,
            gamma_star=report.gamma_star,
            cl_bound_log=report.cl_bound_log,
            exploration_rate=report.exploration_rate,
            capped_rate=report.capped_rate,
            rate_ratio=report.rate_ratio,
            rho=list(report.rho),
            C=report.C,
            bound_constant=report.bound_constant,
            pinsker_holds=report.pinsker_holds,
            cap_below_rate=report.cap_below_rate,
            label=report.label,
        )


class ClFamilyPayload(VersionedPayload):
    """Bounds for every member of the hard family; ``hardest_index`` is 1-based."""

    k: int
    T: int
    hardest_index: int
    min_gamma_star: float
    members: list[BoundsPayload]

    @classmethod
    def from_family(
        cls, family: FamilyReport, instances: Iterable[Instance]
    ) -> "ClFamilyPayload":
        return cls(
            k=family.k,
            T=family.T,
            hardest_index=family.hardest_index,
            min_gamma_star=family.min_gamma_star,
            members=[
                BoundsPayload.from_report(instance, report)
                for instance, report in zip(instances, family.members)
            ],
        )


class DPPayload(VersionedPayload):
    k: int
    N: int
    T: int
    objective: str
    value: float
    states: int
    memo_entries: int
    policy_states: int
    root_action: list[int] | None
    expected_max: float | None = None
    prior_alpha: list[float]
    prior_beta: list[float]

    @classmethod
    def from_solution(
        cls,
        solution: DPSolution,
        *,
        k: int,
        N: int,
        T: int,
        prior_alpha: Iterable[float],
        prior_beta: Iterable[float],
    ) -> "DPPayload":
        root = next((action for state, action in solution.policy.items() if state.t == 0), None)
        return cls(
            k=k,
            N=N,
            T=T,
            objective=solution.objective_tag.value,
            value=solution.value,
            states=solution.states,
            memo_entries=solution.memo_entries,
            policy_states=len(solution.policy),
            root_action=list(root) if root is not None else None,
            expected_max=solution.expected_max,
            prior_alpha=list(prior_alpha),
            prior_beta=list(prior_beta),
        )


class ExponentPayload(BaseModel):
    exponent: float
    exponent_se: float
    intercept: float
    budgets: list[int]
    dropped: list[int]

    @classmethod
    def from_fit(cls, fit: ExponentFit) -> "ExponentPayload":
        return cls(
            exponent=fit.exponent,
            exponent_se=fit.exponent_se,
            intercept=fit.intercept,
            budgets=list(fit.budgets),
            dropped=list(fit.dropped),
        )


class PredictionPayload(BaseModel):
    """Rate predictions placed next to the empirical exponent."""

    gamma_star: float
    pinsker_bound: float
    capped_rate: float
    rho: list[float]


class CheckpointPayload(BaseModel):
    T: int
    regret_hat: float
    err_prob_hat: float
    regret_bound_from_err: float
    share_best_mean: float
    share_best_se: float
    arm_shares: list[float]
    fallback_waves: int

    @classmethod
    def from_estimate(cls, estimate: RegretEstimate) -> "CheckpointPayload":
        return cls(
            T=estimate.T,
            regret_hat=estimate.regret_hat,
            err_prob_hat=estimate.err_prob_hat,
            regret_bound_from_err=estimate.regret_bound_from_err,
            share_best_mean=estimate.share_best_mean,
            share_best_se=estimate.share_best_se,
            arm_shares=list(estimate.arm_shares),
            fallback_waves=estimate.fallback_waves,
        )


class SimulateSummary(VersionedPayload):
    run_name: str
    rule: str
    theta: list[float]
    best_arm: int
    N: int
    T_grid: list[int]
    reps: int
    seed: int
    posterior_draws: int
    fit: ExponentPayload | None = None
    predictions: PredictionPayload
    checkpoints: list[CheckpointPayload] = Field(default_factory=list)


class ReportRow(BaseModel):
    T: int
    budget: int
    regret_hat: float
    exponent_point: float | None
    gamma_star: float
    pinsker_bound: float
    capped_rate: float
    exponent_to_gamma: float | None


class ReportPayload(VersionedPayload):
    """Empirical exponents of a finished simulate run joined with rate predictions."""

    run_name: str
    rule: str
    theta: list[float]
    fit: ExponentPayload | None = None
    predictions: PredictionPayload
    rows: list[ReportRow]


def estimate_row(estimate: RegretEstimate) -> dict[str, Any]:
    """One ``SIMULATE_COLUMNS`` row for ``estimate``."""

    row = {column: getattr(estimate, column) for column in SIMULATE_COLUMNS}
    if row["exponent_point"] is None:
        row["exponent_point"] = math.nan
    return row


__all__ = [
    "SCHEMA_VERSION",
    "SIMULATE_COLUMNS",
    "VersionedPayload",
    "InstancePayload",
    "GammaPayload",
    "BoundsPayload",
    "ClFamilyPayload",
    "DPPayload",
    "ExponentPayload",
    "PredictionPayload",
    "CheckpointPayload",
    "SimulateSummary",
    "ReportRow",
    "ReportPayload",
    "estimate_row",
]
