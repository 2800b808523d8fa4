"""Wave-level allocation rules and the terminal policy choice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateBeliefError
from .posterior import BetaPosterior

RULE_TAGS = ("exploration", "thompson", "uniform")
SHARE_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class AllocationShares:
    """Share vector ``q`` for one wave, tagged with the rule that produced it."""

    q: tuple[float, ...]
    rule_tag: str

    def __post_init__(self) -> None:
        if self.rule_tag not in RULE_TAGS:
            raise ValueError(f"Unknown rule tag '{self.rule_tag}'")
        if min(self.q) < 0:
            raise ValueError(f"shares must be non-negative: {self.q}")
        if abs(sum(self.q) - 1.0) > SHARE_TOLERANCE * max(1, len(self.q)):
            raise ValueError(f"shares must sum to 1, got {sum(self.q)!r}")

    @property
    def k(self) -> int:
        return len(self.q)


def _as_probability_vector(p: Sequence[float]) -> np.ndarray:
    values = np.asarray(p, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("p must be a non-empty vector")
    if (values < 0).any() or (values > 1).any() or abs(values.sum() - 1.0) > 1e-9:
        raise ValueError(f"p is not a probability vector: {values.tolist()}")
    return values


def exploration_shares(p: Sequence[float]) -> AllocationShares:
    """Shares proportional to ``p * (1 - p)``.

    ``1 - p[d]`` is taken as the sum of the other entries, so with two arms
    both weights are the same product ``p[0] * p[1]`` and the split is exactly even.
    """

    values = _as_probability_vector(p)
    others = np.array([np.delete(values, arm).sum() for arm in range(values.size)])
    weights = values * others
    total = weights.sum()
    if total <= 0.0:
        raise DegenerateBeliefError(f"every entry of p is 0 or 1: {values.tolist()}")
    return AllocationShares(q=tuple(float(w) for w in weights / total), rule_tag="exploration")


def thompson_shares(p: Sequence[float]) -> AllocationShares:
    """Shares equal to the probability-of-best vector itself."""

    values = _as_probability_vector(p)
    return AllocationShares(q=tuple(float(v) for v in values), rule_tag="thompson")


def uniform_shares(k: int) -> AllocationShares:
    return AllocationShares(q=(1.0 / k,) * k, rule_tag="uniform")


def shares_to_counts(
    q: AllocationShares | Sequence[float], N: int, *, rotation: int = 0
) -> np.ndarray:
    """Round ``q * N`` to integer counts summing to ``N``.

    Each arm gets ``floor(q[d] * N)``; the leftover units go to the arms with
    the largest fractional remainders. Equal remainders are broken in arm
    order starting from ``rotation`` (the default gives the lowest index).
    """

    if N < 1:
        raise ValueError(f"wave size must be positive, got {N}")
    shares = np.asarray(q.q if isinstance(q, AllocationShares) else q, dtype=float)
    k = shares.size
    exact = shares * N
    counts = np.floor(exact).astype(np.int64)
    leftover = N - int(counts.sum())
    if leftover < 0 or leftover > k:
        raise ValueError(f"shares {shares.tolist()} cannot be apportioned to {N} units")
    if leftover:
        remainders = exact - counts
        tie_rank = (np.arange(k) - rotation) % k
        order = np.lexsort((tie_rank, -remainders))
        counts[order[:leftover]] += 1
    return counts


def choose_policy(post: BetaPosterior) -> int:
    """Arm with the highest posterior mean, ties to the lowest index."""

    return int(np.argmax(post.means()))


RuleHandler = Callable[[np.ndarray | None, int], AllocationShares]


@dataclass(frozen=True, slots=True)
class AllocationRule:
    """Named allocation rule."""

    name: str
    handler: RuleHandler
    needs_posterior: bool

    def shares(self, p: np.ndarray | None, k: int) -> AllocationShares:
        return self.handler(p, k)


REGISTERED_RULES: dict[str, AllocationRule] = {
    "exploration": AllocationRule(
        name="exploration",
        handler=lambda p, k: exploration_shares(p),
        needs_posterior=True,
    ),
    "thompson": AllocationRule(
        name="thompson",
        handler=lambda p, k: thompson_shares(p),
        needs_posterior=True,
    ),
    "uniform": AllocationRule(
        name="uniform",
        handler=lambda p, k: uniform_shares(k),
        needs_posterior=False,
    ),
}


def get_rule(name: str) -> AllocationRule:
    if name not in REGISTERED_RULES:
        raise ValueError(f"Unsupported allocation rule '{name}'")
    return REGISTERED_RULES[name]


__all__ = [
    "AllocationShares",
    "AllocationRule",
    "REGISTERED_RULES",
    "RULE_TAGS",
    "exploration_shares",
    "thompson_shares",
    "uniform_shares",
    "shares_to_counts",
    "choose_policy",
    "get_rule",
]
