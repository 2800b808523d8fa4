"""Large-deviations rates, the optimal allocation program and lower-bound calculators.

The allocation program fixes the best arm's share at 1/2 and maximises the
common rate ``gamma`` subject to ``G_j(1/2, rho_j) >= gamma`` for every
suboptimal arm and ``sum(rho) == 1``. Because ``G_j`` is nondecreasing in
``rho_j``, the solver bisects on ``gamma`` and, for each trial value, bisects
each ``rho_j`` to the smallest share that reaches it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit, logit, xlog1py

from .errors import AllocationSolveError
from .model import Instance, make_cl_instance

LOGGER = logging.getLogger(__name__)

BEST_SHARE = 0.5
C_CONSTANT = 800.0
BOUND_CONSTANT = 200.0
# Relative to the bracket: gamma is of order 1e-9 for arms 1e-4 apart.
GAMMA_XTOL = 1e-15
RHO_XTOL = 1e-15
BISECT_RTOL = 4 * np.finfo(float).eps
SOLVE_TOLERANCE = 1e-9
LABEL = "gamma* (best-arm share fixed at 1/2)"


@dataclass(frozen=True, slots=True)
class GammaSolution:
    """Optimal allocation ``rho`` and rate ``gamma_star`` in input arm order.

    ``residuals[d]`` is ``G_d(rho_best, rho_d) - gamma_star`` for suboptimal
    arms and ``nan`` for the best arm.
    """

    gamma_star: float
    rho: tuple[float, ...]
    residuals: tuple[float, ...]
    best_arm: int
    label: str = LABEL


@dataclass(frozen=True, slots=True)
class ComplexityReport:
    """Side-by-side rates for one instance and budget."""

    k: int
    T: int
    H: float
    pinsker_bound: float
    gamma_star: float
    cl_bound_log: float
    exploration_rate: float
    capped_rate: float
    rate_ratio: float
    rho: tuple[float, ...]
    C: float = C_CONSTANT
    bound_constant: float = BOUND_CONSTANT
    label: str = LABEL

    @property
    def pinsker_holds(self) -> bool:
        return self.pinsker_bound <= self.gamma_star + 1e-9

    @property
    def cap_below_rate(self) -> bool:
        """True only when ``C / log k < 1``, i.e. the cap actually bites."""

        return self.capped_rate < self.exploration_rate


@dataclass(frozen=True, slots=True)
class FamilyReport:
    """Bounds evaluated on every member of the k-arm hard family."""

    k: int
    T: int
    members: tuple[ComplexityReport, ...] = field(default=())

    @property
    def hardest_index(self) -> int:
        """1-based label of the member with the largest complexity."""

        return 1 + int(np.argmax([member.H for member in self.members]))

    @property
    def min_gamma_star(self) -> float:
        return min(member.gamma_star for member in self.members)


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence in nats between Bernoulli(p) and Bernoulli(q).

    Written with ``log1p`` of the relative differences so that the result
    keeps its relative accuracy when ``p`` and ``q`` are close.
    """

    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} must lie in [0, 1]")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q={q} must lie in (0, 1)")
    return float(xlog1py(p, (p - q) / q) + xlog1py(1.0 - p, (q - p) / (1.0 - q)))


def _check_pair(theta1: float, thetaj: float) -> None:
    if not (0.0 < thetaj < theta1 < 1.0):
        raise ValueError(f"need 0 < thetaj < theta1 < 1, got theta1={theta1}, thetaj={thetaj}")


def rate_G_argmin(rho1: float, rhoj: float, theta1: float, thetaj: float) -> float:
    """Minimiser of ``rho1 kl(x, theta1) + rhoj kl(x, thetaj)`` on ``[thetaj, theta1]``.

    Stationarity makes ``logit(x)`` the weight-averaged logit of the means.
    """

    _check_pair(theta1, thetaj)
    if rho1 < 0 or rhoj < 0:
        raise ValueError("weights must be non-negative")
    if rho1 + rhoj == 0:
        return thetaj
    z = (rho1 * logit(theta1) + rhoj * logit(thetaj)) / (rho1 + rhoj)
    x = float(expit(z))
    return min(max(x, thetaj), theta1)


def rate_G(rho1: float, rhoj: float, theta1: float, thetaj: float) -> float:
    """Pairwise rate ``min_x rho1 kl(x, theta1) + rhoj kl(x, thetaj)``."""

    x = rate_G_argmin(rho1, rhoj, theta1, thetaj)
    if rho1 + rhoj == 0:
        return 0.0
    return rho1 * bernoulli_kl(x, theta1) + rhoj * bernoulli_kl(x, thetaj)


def _min_share(gamma: float, theta1: float, thetaj: float) -> float:
    """Smallest ``rho_j`` in ``[0, 1/2]`` with ``G_j(1/2, rho_j) >= gamma``."""

    if gamma <= 0.0:
        return 0.0
    ceiling = rate_G(BEST_SHARE, BEST_SHARE, theta1, thetaj)
    if ceiling < gamma:
        return math.inf
    if ceiling == gamma:
        return BEST_SHARE
    return optimize.bisect(
        lambda rho: rate_G(BEST_SHARE, rho, theta1, thetaj) - gamma,
        0.0,
        BEST_SHARE,
        xtol=RHO_XTOL,
        rtol=BISECT_RTOL,
        maxiter=200,
    )


def solve_gamma_star(instance: Instance, tol: float | None = None) -> GammaSolution:
    """Solve the fixed-best-share allocation program for ``instance``.

    ``tol`` (default ``SOLVE_TOLERANCE``) bounds every residual and the
    distance of ``sum(rho)`` from 1 at the returned solution.

    Raises:
        AllocationSolveError: If either bound fails.
    """

    tol = SOLVE_TOLERANCE if tol is None else tol
    theta = instance.as_array()
    order = np.argsort(-theta, kind="stable")
    sorted_theta = theta[order]
    best = float(sorted_theta[0])
    others = [float(value) for value in sorted_theta[1:]]

    if len(others) == 1:
        gamma = rate_G(BEST_SHARE, BEST_SHARE, best, others[0])
        sorted_rho = [BEST_SHARE, BEST_SHARE]
    else:
        upper = min(rate_G(BEST_SHARE, BEST_SHARE, best, value) for value in others)

        def excess(gamma_value: float) -> float:
            return sum(_min_share(gamma_value, best, value) for value in others) - BEST_SHARE

        gamma = optimize.bisect(
            excess, 0.0, upper, xtol=GAMMA_XTOL * upper, rtol=BISECT_RTOL, maxiter=200
        )
        sorted_rho = [BEST_SHARE] + [_min_share(gamma, best, value) for value in others]

    rho = np.empty_like(theta)
    rho[order] = sorted_rho
    residuals = [
        math.nan
        if arm == instance.best_arm
        else rate_G(rho[instance.best_arm], rho[arm], best, instance.theta[arm]) - gamma
        for arm in range(instance.k)
    ]
    LOGGER.debug("gamma*=%.12g rho=%s residuals=%s", gamma, rho.tolist(), residuals)
    worst = max(abs(value) for value in residuals if not math.isnan(value))
    if abs(rho.sum() - 1.0) > tol or worst > tol:
        raise AllocationSolveError(
            f"theta={list(instance.theta)}: shares sum to {rho.sum()!r} with largest "
            f"residual {worst:.3g}, outside tolerance {tol}"
        )
    return GammaSolution(
        gamma_star=float(gamma),
        rho=tuple(float(value) for value in rho),
        residuals=tuple(float(value) for value in residuals),
        best_arm=instance.best_arm,
    )


def complexity_H(instance: Instance) -> float:
    """Sum of inverse squared gaps over the suboptimal arms."""

    return sum(
        1.0 / gap**2 for arm, gap in enumerate(instance.gaps) if arm != instance.best_arm
    )


def pinsker_bound(instance: Instance) -> float:
    """Lower bound ``1 / (4 H)`` on the optimal rate."""

    return 1.0 / (4.0 * complexity_H(instance))


def cl_regret_bound(k: int, T: int, H: float) -> float:
    """Natural log of ``exp(-200 T / (log(k) H) + 2 sqrt(T log(6 T k))) / (6 k)``.

    The value is returned unclamped; for small ``T`` it may exceed zero.
    """

    if k < 2:
        raise ValueError(f"bound needs k >= 2 (log k must be positive), got {k}")
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    if H <= 0:
        raise ValueError(f"complexity must be positive, got {H}")
    return (
        -math.log(6 * k)
        - BOUND_CONSTANT * T / (math.log(k) * H)
        + 2.0 * math.sqrt(T * math.log(6 * T * k))
    )


def bound_report(instance: Instance, k: int | None, T: int) -> ComplexityReport:
    """Assemble complexity, rates and the lower-bound value for one instance."""

    arms = instance.k if k is None else k
    H = complexity_H(instance)
    solution = solve_gamma_star(instance)
    capped = C_CONSTANT / math.log(arms) * solution.gamma_star
    return ComplexityReport(
        k=arms,
        T=T,
        H=H,
        pinsker_bound=1.0 / (4.0 * H),
        gamma_star=solution.gamma_star,
        cl_bound_log=cl_regret_bound(arms, T, H),
        exploration_rate=solution.gamma_star,
        capped_rate=capped,
        rate_ratio=math.log(arms) / C_CONSTANT,
        rho=solution.rho,
    )


def cl_family_report(k: int, T: int) -> FamilyReport:
    """Evaluate :func:`bound_report` on every member of the hard family."""

    members = tuple(bound_report(make_cl_instance(k, index), k, T) for index in range(1, k + 1))
    return FamilyReport(k=k, T=T, members=members)


__all__ = [
    "GammaSolution",
    "ComplexityReport",
    "FamilyReport",
    "C_CONSTANT",
    "BOUND_CONSTANT",
    "bernoulli_kl",
    "rate_G",
    "rate_G_argmin",
    "solve_gamma_star",
    "complexity_H",
    "pinsker_bound",
    "cl_regret_bound",
    "bound_report",
    "cl_family_report",
]
