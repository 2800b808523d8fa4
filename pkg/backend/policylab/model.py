"""Problem instances, experiment state and single-wave simulation.

Arms are indexed from 0 throughout the library. The hard-family constructor
keeps the 1-based instance label ``index`` because that label also fixes
the arm whose mean is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import InvalidStatsError, OutOfRangeError, TiedBestArmError, TooFewArmsError


@dataclass(frozen=True, slots=True)
class Instance:
    """True success probabilities with a unique best arm."""

    theta: tuple[float, ...]
    best_arm: int

    def __post_init__(self) -> None:
        _check_theta(self.theta)
        if self.best_arm != _unique_argmax(self.theta):
            raise ValueError(f"best_arm {self.best_arm} is not the argmax of {self.theta}")

    @property
    def k(self) -> int:
        return len(self.theta)

    @property
    def best_mean(self) -> float:
        return self.theta[self.best_arm]

    @property
    def gaps(self) -> tuple[float, ...]:
        """Regret of choosing each arm, zero for the best arm."""

        best = self.best_mean
        return tuple(best - value for value in self.theta)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)

    def as_dict(self) -> dict[str, Any]:
        return {"theta": list(self.theta), "best_arm": self.best_arm}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Instance":
        instance = validate_instance(payload["theta"])
        if "best_arm" in payload and int(payload["best_arm"]) != instance.best_arm:
            raise ValueError("best_arm in payload disagrees with theta")
        return instance


@dataclass(frozen=True, slots=True)
class SufficientStats:
    """Cumulative assignment counts ``m`` and success counts ``r`` per arm."""

    m: tuple[int, ...]
    r: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.m) != len(self.r):
            raise InvalidStatsError("m and r must have the same length")
        for idx, (assigned, successes) in enumerate(zip(self.m, self.r)):
            if assigned < 0 or successes < 0:
                raise InvalidStatsError(f"negative count for arm {idx}")
            if successes > assigned:
                raise InvalidStatsError(
                    f"arm {idx} has {successes} successes out of {assigned} assignments"
                )

    @classmethod
    def zeros(cls, k: int) -> "SufficientStats":
        return cls(m=(0,) * k, r=(0,) * k)

    @property
    def k(self) -> int:
        return len(self.m)

    @property
    def total(self) -> int:
        """Number of subjects observed so far."""

        return sum(self.m)

    def add(self, counts: Sequence[int], successes: Sequence[int]) -> "SufficientStats":
        """Return the statistics after observing one more wave."""

        if len(counts) != self.k or len(successes) != self.k:
            raise InvalidStatsError("wave vectors must match the arm count")
        return SufficientStats(
            m=tuple(int(a) + int(b) for a, b in zip(self.m, counts)),
            r=tuple(int(a) + int(b) for a, b in zip(self.r, successes)),
        )

    def __add__(self, other: "SufficientStats") -> "SufficientStats":
        return self.add(other.m, other.r)


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Design of one batched experiment with a fixed wave size."""

    k: int
    N: int
    T: int
    prior_alpha: tuple[float, ...] = field(default=())
    prior_beta: tuple[float, ...] = field(default=())
    seed: int = 0
    posterior_draws: int = 10_000

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.N < 1 or self.T < 1:
            raise ValueError(f"wave size N={self.N} and waves T={self.T} must be >= 1")
        if self.posterior_draws < 1:
            raise ValueError("posterior_draws must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        # Empty priors default to Beta(1, 1) on every arm.
        if not self.prior_alpha:
            object.__setattr__(self, "prior_alpha", (1.0,) * self.k)
        if not self.prior_beta:
            object.__setattr__(self, "prior_beta", (1.0,) * self.k)
        if len(self.prior_alpha) != self.k or len(self.prior_beta) != self.k:
            raise ValueError("prior parameters must have one entry per arm")
        if min(self.prior_alpha) <= 0 or min(self.prior_beta) <= 0:
            raise ValueError("prior parameters must be positive")

    @property
    def budget(self) -> int:
        """Total number of subjects ``N * T``."""

        return self.N * self.T

    def with_horizon(self, T: int) -> "ExperimentConfig":
        return ExperimentConfig(
            k=self.k,
            N=self.N,
            T=T,
            prior_alpha=self.prior_alpha,
            prior_beta=self.prior_beta,
            seed=self.seed,
            posterior_draws=self.posterior_draws,
        )


def _check_theta(theta: Sequence[float]) -> None:
    if len(theta) < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {len(theta)}")
    for idx, value in enumerate(theta):
        if not (math.isfinite(value) and 0.0 < value < 1.0):
            raise OutOfRangeError(f"theta[{idx}]={value} is outside (0, 1)")


def _unique_argmax(theta: Sequence[float]) -> int:
    best = max(theta)
    winners = [idx for idx, value in enumerate(theta) if value == best]
    if len(winners) > 1:
        raise TiedBestArmError(f"arms {winners} tie for the best mean {best}")
    return winners[0]


def validate_instance(theta: Sequence[float]) -> Instance:
    """Build an :class:`Instance`, rejecting ties, boundary values and k < 2."""

    values = tuple(float(value) for value in theta)
    _check_theta(values)
    return Instance(theta=values, best_arm=_unique_argmax(values))


def make_cl_instance(k: int, index: int) -> Instance:
    """Return member ``index`` (1-based) of the k-arm hard family.

    Member 1 has mean 1/2 on the first arm and ``1/2 - d/(4k)`` on arm d.
    Member d > 1 raises arm d to ``1/2 + d/(4k)`` so that it becomes best.
    """

    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    if not 1 <= index <= k:
        raise ValueError(f"instance index must lie in 1..{k}, got {index}")
    theta = [0.5] + [0.5 - d / (4 * k) for d in range(2, k + 1)]
    if index > 1:
        theta[index - 1] = 0.5 + index / (4 * k)
    return validate_instance(theta)


def simulate_wave(
    instance: Instance, counts: Sequence[int], rng: np.random.Generator
) -> tuple[int, ...]:
    """Draw per-arm success counts ``s[d] ~ Binomial(n[d], theta[d])``.

    One binomial variate is requested per arm, in arm order, in a single
    vectorised call; the result is fully determined by the generator state.
    """

    n = np.asarray(counts, dtype=np.int64)
    if n.shape != (instance.k,):
        raise InvalidStatsError(f"expected {instance.k} counts, got shape {n.shape}")
    if (n < 0).any():
        raise InvalidStatsError(f"negative assignment counts: {list(n)}")
    successes = rng.binomial(n, instance.as_array())
    return tuple(int(value) for value in successes)


__all__ = [
    "Instance",
    "SufficientStats",
    "ExperimentConfig",
    "validate_instance",
    "make_cl_instance",
    "simulate_wave",
]
