"""Conjugate Beta-Bernoulli beliefs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betainc, betaln, gammaln, xlog1py, xlogy

from .errors import InvalidStatsError
from .model import ExperimentConfig, SufficientStats

QUAD_TOLERANCE = 1e-10
MAX_SUM_STEPS = 64


@dataclass(frozen=True, slots=True)
class BetaPosterior:
    """Independent ``Beta(alpha[d], beta[d])`` beliefs, one per arm."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.alpha) != len(self.beta) or not self.alpha:
            raise ValueError("alpha and beta must be non-empty and of equal length")
        if min(self.alpha) <= 0 or min(self.beta) <= 0:
            raise ValueError(f"Beta parameters must be positive: {self.alpha}, {self.beta}")

    @classmethod
    def uniform(cls, k: int) -> "BetaPosterior":
        return cls(alpha=(1.0,) * k, beta=(1.0,) * k)

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "BetaPosterior":
        return cls(alpha=config.prior_alpha, beta=config.prior_beta)

    @property
    def k(self) -> int:
        return len(self.alpha)

    def means(self) -> np.ndarray:
        a = np.asarray(self.alpha, dtype=float)
        return a / (a + np.asarray(self.beta, dtype=float))


def update_posterior(prior: BetaPosterior, stats: SufficientStats) -> BetaPosterior:
    """Add successes to ``alpha`` and failures to ``beta``."""

    if stats.k != prior.k:
        raise InvalidStatsError(f"stats cover {stats.k} arms, prior covers {prior.k}")
    return BetaPosterior(
        alpha=tuple(a + r for a, r in zip(prior.alpha, stats.r)),
        beta=tuple(b + m - r for b, m, r in zip(prior.beta, stats.m, stats.r)),
    )


def posterior_mean(post: BetaPosterior, d: int) -> float:
    """Expected success probability of arm ``d``; the social welfare of policy ``d``."""

    return post.alpha[d] / (post.alpha[d] + post.beta[d])


def beta_binomial_logpmf(alpha: float, beta: float, n: int, s: int | np.ndarray) -> np.ndarray:
    """Log of ``C(n, s) B(alpha + s, beta + n - s) / B(alpha, beta)``."""

    s = np.asarray(s)
    log_choose = gammaln(n + 1) - gammaln(s + 1) - gammaln(n - s + 1)
    return log_choose + betaln(alpha + s, beta + n - s) - betaln(alpha, beta)


def beta_binomial_pmf(alpha: float, beta: float, n: int, s: int) -> float:
    """Predictive probability of ``s`` successes in ``n`` trials."""

    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    if n < 0 or not 0 <= s <= n:
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    return float(np.exp(beta_binomial_logpmf(alpha, beta, n, s)))


def beta_binomial_pmf_vector(alpha: float, beta: float, n: int) -> np.ndarray:
    """Predictive probabilities for ``s = 0..n``."""

    return np.exp(beta_binomial_logpmf(alpha, beta, n, np.arange(n + 1)))


def prob_best(post: BetaPosterior, draws: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo estimate of the posterior probability that each arm is best.

    Draws ``draws`` joint parameter vectors and counts argmax wins; ties go to
    the lowest index. Consumes exactly ``draws * k`` Beta variates. The
    returned vector sums to exactly 1.0: every entry is ``wins / draws``
    except the largest, which absorbs the rounding of the others.
    """

    if draws < 1:
        raise ValueError("draws must be positive")
    if post.k == 1:
        return np.ones(1)
    samples = rng.beta(post.alpha, post.beta, size=(draws, post.k))
    wins = np.bincount(np.argmax(samples, axis=1), minlength=post.k)
    p = wins / draws
    top = int(np.argmax(p))
    p[top] = 0.0
    p[top] = 1.0 - p.sum()
    # Step the largest entry one ulp at a time until the float total is exact.
    for _ in range(MAX_SUM_STEPS):
        total = p.sum()
        if total == 1.0:
            break
        p[top] = np.nextafter(p[top], 0.0 if total > 1.0 else 1.0)
    return p


def _beta_pdf(x: float, a: float, b: float) -> float:
    return float(np.exp(xlogy(a - 1.0, x) + xlog1py(b - 1.0, -x) - betaln(a, b)))


def _pdf_cdf_integral(first: tuple[float, float], second: tuple[float, float]) -> float:
    def integrand(x: float) -> float:
        # betainc is the regularized incomplete beta, i.e. the Beta CDF.
        return _beta_pdf(x, *first) * float(betainc(second[0], second[1], x))

    value, _ = integrate.quad(
        integrand, 0.0, 1.0, epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE, limit=200
    )
    return value


def prob_best_exact_2arm(post: BetaPosterior) -> float:
    """``P(theta_0 > theta_1)`` by adaptive quadrature of ``pdf_0 * CDF_1``."""

    if post.k != 2:
        raise ValueError(f"exact probability needs exactly 2 arms, got {post.k}")
    value = _pdf_cdf_integral((post.alpha[0], post.beta[0]), (post.alpha[1], post.beta[1]))
    return min(1.0, max(0.0, value))


def expected_max(post: BetaPosterior) -> float:
    """``E[max_d theta_d]`` under the independent Beta marginals.

    Integrates ``1 - prod_d CDF_d(x)`` over the unit interval.
    """

    a = np.asarray(post.alpha, dtype=float)
    b = np.asarray(post.beta, dtype=float)

    def integrand(x: float) -> float:
        return float(1.0 - np.prod(betainc(a, b, x)))

    value, _ = integrate.quad(
        integrand, 0.0, 1.0, epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE, limit=200
    )
    return value


__all__ = [
    "BetaPosterior",
    "update_posterior",
    "posterior_mean",
    "beta_binomial_logpmf",
    "beta_binomial_pmf",
    "beta_binomial_pmf_vector",
    "prob_best",
    "prob_best_exact_2arm",
    "expected_max",
]
