"""Replicated adaptive experiments and their summary statistics."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import dask
import numpy as np
from dask import delayed
from scipy import stats as sps

from .allocate import (
    AllocationRule,
    choose_policy,
    get_rule,
    shares_to_counts,
    uniform_shares,
)
from .errors import DegenerateBeliefError, ExponentFitError, PathExplosionError
from .model import ExperimentConfig, Instance, SufficientStats, simulate_wave
from .posterior import BetaPosterior, prob_best, update_posterior
from .streams import Purpose, replication_key, wave_generator

LOGGER = logging.getLogger(__name__)

EXACT_PATH_CAP = 1_000_000


@dataclass(frozen=True, slots=True)
class ReplicationResult:
    """Terminal outcome of one replication at horizon ``T``."""

    rep_index: int
    T: int
    chosen_arm: int
    regret: float
    final_stats: SufficientStats
    share_best: float
    fallback_waves: int = 0

    def arm_shares(self) -> np.ndarray:
        return np.asarray(self.final_stats.m, dtype=float) / self.final_stats.total


@dataclass(frozen=True, slots=True)
class RegretEstimate:
    """Monte Carlo summary for one horizon.

    ``exponent_point`` is ``-log(regret_hat) / (N T)`` and is ``None`` when no
    replication chose a suboptimal arm.
    """

    rule: str
    k: int
    N: int
    T: int
    reps: int
    regret_hat: float
    regret_se: float
    err_prob_hat: float
    exponent_point: float | None
    share_best_mean: float
    share_best_se: float
    arm_shares: tuple[float, ...]
    regret_bound_from_err: float
    fallback_waves: int
    seed: int

    @property
    def budget(self) -> int:
        return self.N * self.T


@dataclass(frozen=True, slots=True)
class ExponentFit:
    """Least-squares fit of ``log(regret)`` against the budget ``N T``."""

    exponent: float
    exponent_se: float
    intercept: float
    budgets: tuple[int, ...]
    dropped: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class ShareCheckpoint:
    T: int
    share_best_mean: float
    share_best_se: float
    arm_shares: tuple[float, ...]


def _resolve_rule(rule: AllocationRule | str) -> AllocationRule:
    return get_rule(rule) if isinstance(rule, str) else rule


def run_trajectory(
    instance: Instance,
    config: ExperimentConfig,
    rule: AllocationRule | str,
    rep_index: int,
    checkpoints: Iterable[int] | None = None,
) -> list[ReplicationResult]:
    """Run one replication to the largest checkpoint, recording every checkpoint.

    Allocation depends on the state only, so the outcome recorded at ``T`` is
    distributed exactly as a replication with horizon ``T``.

    Leftover units of wave ``w`` break remainder ties starting at arm
    ``(w * N) mod k`` rather than always at the lowest index, so equal shares
    still balance across waves when ``N`` is not a multiple of ``k``.
    """

    rule = _resolve_rule(rule)
    k, N = instance.k, config.N
    if config.k != k:
        raise ValueError(f"config has k={config.k}, instance has {k} arms")
    marks = sorted(set(checkpoints or (config.T,)))
    if marks[0] < 1:
        raise ValueError("checkpoints must be positive wave counts")

    key = replication_key(config.seed, rep_index)
    prior = BetaPosterior.from_config(config)
    fixed_shares = None if rule.needs_posterior else rule.shares(None, k)
    m = np.zeros(k, dtype=np.int64)
    r = np.zeros(k, dtype=np.int64)
    fallbacks = 0
    results: list[ReplicationResult] = []
    pending = iter(marks)
    next_mark = next(pending)

    for wave_index in range(marks[-1]):
        if fixed_shares is not None:
            shares = fixed_shares
        else:
            stats = SufficientStats(m=tuple(m.tolist()), r=tuple(r.tolist()))
            post = update_posterior(prior, stats)
            rng = wave_generator(key, wave_index, Purpose.POSTERIOR)
            p = prob_best(post, config.posterior_draws, rng)
            try:
                shares = rule.shares(p, k)
            except DegenerateBeliefError:
                LOGGER.debug(
                    "rep %d wave %d: degenerate belief, uniform wave", rep_index, wave_index
                )
                shares = uniform_shares(k)
                fallbacks += 1
        counts = shares_to_counts(shares, N, rotation=(wave_index * N) % k)
        successes = simulate_wave(
            instance, counts, wave_generator(key, wave_index, Purpose.OUTCOMES)
        )
        m += counts
        r += np.asarray(successes, dtype=np.int64)

        if wave_index + 1 == next_mark:
            final = SufficientStats(m=tuple(m.tolist()), r=tuple(r.tolist()))
            chosen = choose_policy(update_posterior(prior, final))
            results.append(
                ReplicationResult(
                    rep_index=rep_index,
                    T=next_mark,
                    chosen_arm=chosen,
                    regret=instance.gaps[chosen],
                    final_stats=final,
                    share_best=final.m[instance.best_arm] / final.total,
                    fallback_waves=fallbacks,
                )
            )
            next_mark = next(pending, -1)
    return results


def run_replication(
    instance: Instance,
    config: ExperimentConfig,
    rule: AllocationRule | str,
    rep_index: int,
) -> ReplicationResult:
    """One full adaptive experiment of ``config.T`` waves."""

    return run_trajectory(instance, config, rule, rep_index, (config.T,))[0]


def _run_block(
    instance: Instance,
    config: ExperimentConfig,
    rule_name: str,
    checkpoints: tuple[int, ...],
    rep_indices: range,
) -> list[list[ReplicationResult]]:
    return [
        run_trajectory(instance, config, rule_name, rep, checkpoints) for rep in rep_indices
    ]


def run_replications(
    instance: Instance,
    config: ExperimentConfig,
    rule: str,
    reps: int,
    checkpoints: Sequence[int] | None = None,
    *,
    workers: int = 1,
    scheduler: str = "processes",
    block_size: int = 500,
) -> list[list[ReplicationResult]]:
    """Run ``reps`` trajectories; row ``i`` holds replication ``i`` at each checkpoint."""

    if reps < 1:
        raise ValueError("reps must be at least 1")
    get_rule(rule)
    marks = tuple(sorted(set(checkpoints or (config.T,))))
    blocks = [range(start, min(start + block_size, reps)) for start in range(0, reps, block_size)]
    tasks = [delayed(_run_block)(instance, config, rule, marks, block) for block in blocks]
    if workers == 1 or len(tasks) == 1:
        computed = dask.compute(*tasks, scheduler="synchronous")
    else:
        computed = dask.compute(*tasks, scheduler=scheduler, num_workers=workers)
    return list(itertools.chain.from_iterable(computed))


def summarize(
    instance: Instance,
    config: ExperimentConfig,
    rule: str,
    results: Sequence[ReplicationResult],
) -> RegretEstimate:
    """Aggregate replications at one horizon in ``rep_index`` order."""

    ordered = sorted(results, key=lambda result: result.rep_index)
    reps = len(ordered)
    horizons = {result.T for result in ordered}
    if len(horizons) != 1:
        raise ValueError(f"results mix horizons {sorted(horizons)}")
    T = horizons.pop()

    chosen = np.array([result.chosen_arm for result in ordered])
    frequencies = np.bincount(chosen, minlength=instance.k) / reps
    regret_hat = math.fsum(gap * freq for gap, freq in zip(instance.gaps, frequencies))
    err_prob_hat = int((chosen != instance.best_arm).sum()) / reps
    regrets = np.array([result.regret for result in ordered])
    shares = np.array([result.share_best for result in ordered])
    arm_shares = np.mean([result.arm_shares() for result in ordered], axis=0)
    budget = config.N * T
    fallbacks = sum(result.fallback_waves for result in ordered)
    if fallbacks:
        LOGGER.info("%d degenerate-belief waves fell back to uniform at T=%d", fallbacks, T)

    return RegretEstimate(
        rule=rule,
        k=instance.k,
        N=config.N,
        T=T,
        reps=reps,
        regret_hat=regret_hat,
        regret_se=_standard_error(regrets),
        err_prob_hat=err_prob_hat,
        exponent_point=-math.log(regret_hat) / budget if regret_hat > 0 else None,
        share_best_mean=float(shares.mean()),
        share_best_se=_standard_error(shares),
        arm_shares=tuple(float(value) for value in arm_shares),
        regret_bound_from_err=err_prob_hat * sum(instance.gaps),
        fallback_waves=fallbacks,
        seed=config.seed,
    )


def _standard_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def estimate_grid(
    instance: Instance,
    config: ExperimentConfig,
    rule: str,
    reps: int,
    T_grid: Sequence[int] | None = None,
    **parallel,
) -> list[RegretEstimate]:
    """Regret estimates at every horizon in ``T_grid`` from shared trajectories."""

    grid = tuple(sorted(set(T_grid or (config.T,))))
    rows = run_replications(instance, config, rule, reps, grid, **parallel)
    return [
        summarize(instance, config, rule, [row[position] for row in rows])
        for position in range(len(grid))
    ]


def estimate_regret(
    instance: Instance,
    config: ExperimentConfig,
    rule: str,
    reps: int,
    **parallel,
) -> RegretEstimate:
    """Expected policy regret and misidentification frequency at ``config.T``."""

    return estimate_grid(instance, config, rule, reps, (config.T,), **parallel)[0]


def fit_exponent(points: Sequence[tuple[int, float]]) -> ExponentFit:
    """Fit ``log(regret) = intercept - exponent * budget`` by ordinary least squares.

    Points with zero regret are dropped with a warning.
    """

    usable = [(budget, regret) for budget, regret in points if regret > 0]
    dropped = tuple(budget for budget, regret in points if regret <= 0)
    if dropped:
        LOGGER.warning("dropping zero-regret budgets %s from the exponent fit", list(dropped))
    if len(usable) < 2:
        raise ExponentFitError(f"need at least 2 positive-regret points, got {len(usable)}")
    budgets = np.array([budget for budget, _ in usable], dtype=float)
    log_regret = np.log([regret for _, regret in usable])
    fit = sps.linregress(budgets, log_regret)
    return ExponentFit(
        exponent=-float(fit.slope),
        exponent_se=float(fit.stderr),
        intercept=float(fit.intercept),
        budgets=tuple(int(budget) for budget in budgets),
        dropped=dropped,
    )


def estimate_exponent(
    instance: Instance,
    config: ExperimentConfig,
    T_grid: Sequence[int],
    rule: str,
    reps: int,
    **parallel,
) -> tuple[ExponentFit, list[RegretEstimate]]:
    """Empirical decay exponent of the expected regret over a horizon grid."""

    if len(set(T_grid)) < 3:
        raise ValueError("exponent estimation needs at least 3 distinct horizons")
    estimates = estimate_grid(instance, config, rule, reps, T_grid, **parallel)
    fit = fit_exponent([(estimate.budget, estimate.regret_hat) for estimate in estimates])
    return fit, estimates


def share_trajectory(
    instance: Instance,
    config: ExperimentConfig,
    rule: str,
    reps: int,
    T_grid: Sequence[int] | None = None,
    **parallel,
) -> list[ShareCheckpoint]:
    """Mean cumulative best-arm share ``m[best] / (N T)`` at each checkpoint."""

    return [
        ShareCheckpoint(
            T=estimate.T,
            share_best_mean=estimate.share_best_mean,
            share_best_se=estimate.share_best_se,
            arm_shares=estimate.arm_shares,
        )
        for estimate in estimate_grid(instance, config, rule, reps, T_grid, **parallel)
    ]


def exact_error_probability(
    instance: Instance,
    counts: Sequence[int],
    prior: BetaPosterior | None = None,
) -> float:
    """Misidentification probability for fixed per-arm sample sizes.

    Sums Binomial outcome probabilities over every success vector and applies
    the terminal choice rule, ties included.
    """

    prior = prior or BetaPosterior.uniform(instance.k)
    sizes = [int(n) for n in counts]
    if len(sizes) != instance.k or min(sizes) < 0:
        raise ValueError(f"invalid sample sizes {sizes}")
    if math.prod(n + 1 for n in sizes) > EXACT_PATH_CAP:
        raise PathExplosionError(f"sample sizes {sizes} exceed the enumeration cap")

    grids = np.meshgrid(*(np.arange(n + 1) for n in sizes), indexing="ij")
    alpha = np.stack([a + s for a, s in zip(prior.alpha, grids)], axis=-1)
    beta = np.stack([b + n - s for b, n, s in zip(prior.beta, sizes, grids)], axis=-1)
    chosen = np.argmax(alpha / (alpha + beta), axis=-1)
    probability = np.ones(chosen.shape)
    for arm, (n, s) in enumerate(zip(sizes, grids)):
        probability = probability * sps.binom.pmf(s, n, instance.theta[arm])
    return float(probability[chosen != instance.best_arm].sum())


__all__ = [
    "ReplicationResult",
    "RegretEstimate",
    "ExponentFit",
    "ShareCheckpoint",
    "run_trajectory",
    "run_replication",
    "run_replications",
    "summarize",
    "estimate_grid",
    "estimate_regret",
    "fit_exponent",
    "estimate_exponent",
    "share_trajectory",
    "exact_error_probability",
]
