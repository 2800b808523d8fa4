"""Exact backward induction over sufficient-statistic states.

A state ``(m, r, t)`` holds the cumulative counts after ``t`` waves. Each
action is a composition ``n`` of the wave size over the arms; outcomes follow
independent Beta-Binomial predictive laws. Values are memoised on a canonical
key that sorts arms by ``(prior, m, r)``, which merges states that differ only
by a relabelling of exchangeable arms.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import PathExplosionError, StateSpaceTooLargeError
from .posterior import BetaPosterior, beta_binomial_pmf_vector, expected_max

LOGGER = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 10_000_000
DEFAULT_PATH_CAP = 1_000_000
TIE_TOLERANCE = 1e-12


class Objective(str, Enum):
    WELFARE = "welfare"
    BAYES_REGRET = "bayes_regret"


@dataclass(frozen=True, slots=True)
class DPState:
    """Cumulative counts after ``t`` waves."""

    m: tuple[int, ...]
    r: tuple[int, ...]
    t: int

    def __post_init__(self) -> None:
        if any(rr > mm or rr < 0 for mm, rr in zip(self.m, self.r)):
            raise ValueError(f"invalid counts m={self.m}, r={self.r}")

    @classmethod
    def root(cls, k: int) -> "DPState":
        return cls(m=(0,) * k, r=(0,) * k, t=0)

    def advance(self, counts: Sequence[int], successes: Sequence[int]) -> "DPState":
        return DPState(
            m=tuple(a + b for a, b in zip(self.m, counts)),
            r=tuple(a + b for a, b in zip(self.r, successes)),
            t=self.t + 1,
        )


@dataclass(frozen=True, slots=True)
class DPSolution:
    """Optimal value and an optimal policy on the states it reaches."""

    value: float
    policy: Mapping[DPState, tuple[int, ...]]
    objective_tag: Objective
    states: int
    memo_entries: int = 0
    expected_max: float | None = field(default=None)


def compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All non-negative integer vectors of length ``parts`` summing to ``total``, sorted."""

    if parts == 1:
        return [(total,)]
    result = []
    for head in range(total + 1):
        for tail in compositions(total - head, parts - 1):
            result.append((head, *tail))
    return result


def layer_counts(k: int, N: int, T: int) -> list[int]:
    """Number of reachable ``(m, r)`` pairs after each of ``0..T`` waves.

    Summing ``prod_d (m_d + 1)`` over compositions of ``N t`` gives the
    coefficient of ``x^(N t)`` in ``(1 - x)^(-2k)``.
    """

    return [math.comb(N * t + 2 * k - 1, 2 * k - 1) for t in range(T + 1)]


def enumerate_states(k: int, N: int, T: int, cap: int = DEFAULT_STATE_CAP) -> int:
    """Number of reachable terminal states; the cap applies to all layers together."""

    layers = layer_counts(k, N, T)
    total = sum(layers)
    if total > cap:
        raise StateSpaceTooLargeError(
            f"k={k}, N={N}, T={T} reaches {total} states, above the cap of {cap}"
        )
    return layers[-1]


def _posterior(prior: BetaPosterior, state: DPState) -> BetaPosterior:
    return BetaPosterior(
        alpha=tuple(a + r for a, r in zip(prior.alpha, state.r)),
        beta=tuple(b + m - r for b, m, r in zip(prior.beta, state.m, state.r)),
    )


def terminal_value(prior: BetaPosterior, state: DPState, objective: Objective) -> float:
    """Objective evaluated once the experiment has ended in ``state``."""

    post = _posterior(prior, state)
    best_mean = float(post.means().max())
    if objective is Objective.WELFARE:
        return best_mean
    return expected_max(post) - best_mean


def _outcomes(
    prior: BetaPosterior, state: DPState, counts: Sequence[int]
) -> Iterator[tuple[tuple[int, ...], float]]:
    """Yield each success vector with its Beta-Binomial probability."""

    post = _posterior(prior, state)
    pmfs = [
        beta_binomial_pmf_vector(a, b, n) for a, b, n in zip(post.alpha, post.beta, counts)
    ]
    for successes in itertools.product(*(range(n + 1) for n in counts)):
        prob = 1.0
        for pmf, s in zip(pmfs, successes):
            prob *= float(pmf[s])
        yield successes, prob


class _BackwardInduction:
    def __init__(
        self, k: int, N: int, T: int, prior: BetaPosterior, objective: Objective
    ) -> None:
        self.T = T
        self.prior = prior
        self.objective = objective
        self.actions = compositions(N, k)
        self.memo: dict[tuple, float] = {}

    def _key(self, state: DPState) -> tuple:
        arms = sorted(zip(self.prior.alpha, self.prior.beta, state.m, state.r))
        return (state.t, tuple(arms))

    def _better(self, candidate: float, incumbent: float) -> bool:
        margin = TIE_TOLERANCE * (1.0 + abs(incumbent))
        if self.objective is Objective.WELFARE:
            return candidate > incumbent + margin
        return candidate < incumbent - margin

    def action_value(self, state: DPState, counts: Sequence[int]) -> float:
        return sum(
            prob * self.value(state.advance(counts, successes))
            for successes, prob in _outcomes(self.prior, state, counts)
        )

    def best_action(self, state: DPState) -> tuple[tuple[int, ...], float]:
        best_counts = self.actions[0]
        best_value = self.action_value(state, best_counts)
        for counts in self.actions[1:]:
            candidate = self.action_value(state, counts)
            if self._better(candidate, best_value):
                best_counts, best_value = counts, candidate
        return best_counts, best_value

    def value(self, state: DPState) -> float:
        key = self._key(state)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        if state.t == self.T:
            result = terminal_value(self.prior, state, self.objective)
        else:
            _, result = self.best_action(state)
        self.memo[key] = result
        return result

    def policy(self) -> dict[DPState, tuple[int, ...]]:
        """Optimal action at every state reached under the optimal policy."""

        table: dict[DPState, tuple[int, ...]] = {}
        frontier = [DPState.root(len(self.prior.alpha))]
        while frontier:
            state = frontier.pop()
            if state.t == self.T or state in table:
                continue
            counts, _ = self.best_action(state)
            table[state] = counts
            for successes, _prob in _outcomes(self.prior, state, counts):
                frontier.append(state.advance(counts, successes))
        return table


def solve_dp(
    k: int,
    N: int,
    T: int,
    prior: BetaPosterior,
    objective: Objective | str = Objective.WELFARE,
    *,
    cap: int = DEFAULT_STATE_CAP,
) -> DPSolution:
    """Solve the finite-horizon design problem exactly.

    ``welfare`` maximises the expected best terminal posterior mean;
    ``bayes_regret`` minimises ``E[max_d theta_d] - E[theta of the chosen arm]``.
    """

    objective = Objective(objective)
    if prior.k != k:
        raise ValueError(f"prior covers {prior.k} arms, expected {k}")
    if N < 1 or T < 0:
        raise ValueError(f"need N >= 1 and T >= 0, got N={N}, T={T}")
    terminal_states = enumerate_states(k, N, T, cap)
    LOGGER.info(
        "solving %s DP with k=%d N=%d T=%d (%d terminal states)",
        objective.value,
        k,
        N,
        T,
        terminal_states,
    )

    solver = _BackwardInduction(k, N, T, prior, objective)
    value = solver.value(DPState.root(k))
    policy = solver.policy()
    LOGGER.debug("memoised %d canonical states", len(solver.memo))
    return DPSolution(
        value=value,
        policy=policy,
        objective_tag=objective,
        states=terminal_states,
        memo_entries=len(solver.memo),
        expected_max=expected_max(prior) if objective is Objective.BAYES_REGRET else None,
    )


def brute_force_value(
    k: int,
    N: int,
    T: int,
    prior: BetaPosterior,
    objective: Objective | str,
    plan: Sequence[Sequence[int]] | Mapping[DPState, Sequence[int]],
    *,
    max_paths: int = DEFAULT_PATH_CAP,
) -> float:
    """Exact expected objective of a fixed plan by summing over every outcome path.

    ``plan`` is either one assignment vector per wave or a map from states to
    assignment vectors, such as :attr:`DPSolution.policy`.
    """

    objective = Objective(objective)
    is_table = isinstance(plan, Mapping)
    if not is_table:
        if len(plan) != T:
            raise ValueError(f"plan has {len(plan)} waves, expected {T}")
        paths = math.prod(math.prod(n + 1 for n in counts) for counts in plan)
        if paths > max_paths:
            raise PathExplosionError(f"plan has {paths} outcome paths, cap is {max_paths}")

    leaves = 0

    def assignment(state: DPState) -> Sequence[int]:
        if is_table:
            if state not in plan:
                raise ValueError(f"plan has no assignment for {state}")
            counts = plan[state]
        else:
            counts = plan[state.t]
        if len(counts) != k or sum(counts) != N or min(counts) < 0:
            raise ValueError(f"assignment {tuple(counts)} is not a split of {N} over {k} arms")
        return counts

    def expand(state: DPState, weight: float) -> float:
        nonlocal leaves
        if state.t == T:
            leaves += 1
            if leaves > max_paths:
                raise PathExplosionError(f"more than {max_paths} outcome paths")
            return weight * terminal_value(prior, state, objective)
        counts = assignment(state)
        return sum(
            expand(state.advance(counts, successes), weight * prob)
            for successes, prob in _outcomes(prior, state, counts)
        )

    return expand(DPState.root(k), 1.0)


__all__ = [
    "Objective",
    "DPState",
    "DPSolution",
    "compositions",
    "layer_counts",
    "enumerate_states",
    "terminal_value",
    "solve_dp",
    "brute_force_value",
]
