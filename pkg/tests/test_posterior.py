from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from policylab.errors import InvalidStatsError
from policylab.model import ExperimentConfig, SufficientStats
from policylab.posterior import (
    BetaPosterior,
    beta_binomial_pmf,
    beta_binomial_pmf_vector,
    expected_max,
    posterior_mean,
    prob_best,
    prob_best_exact_2arm,
    update_posterior,
)


def _random_stats(rng: np.random.Generator, k: int) -> SufficientStats:
    m = rng.integers(0, 30, size=k)
    r = rng.integers(0, m + 1)
    return SufficientStats(m=tuple(int(v) for v in m), r=tuple(int(v) for v in r))


def _random_prior(rng: np.random.Generator, k: int) -> BetaPosterior:
    # Quarter-integers keep every sum exact in binary floating point.
    return BetaPosterior(
        alpha=tuple(rng.integers(1, 40, size=k) / 4),
        beta=tuple(rng.integers(1, 40, size=k) / 4),
    )


def _check_update_formula(cases: int) -> None:
    rng = np.random.default_rng(1)
    for _ in range(cases):
        k = int(rng.integers(1, 5))
        prior, stats = _random_prior(rng, k), _random_stats(rng, k)
        post = update_posterior(prior, stats)
        for d in range(k):
            assert post.alpha[d] == prior.alpha[d] + stats.r[d]
            assert post.beta[d] == prior.beta[d] + stats.m[d] - stats.r[d]


def _check_additivity(cases: int) -> None:
    rng = np.random.default_rng(2)
    for _ in range(cases):
        prior = _random_prior(rng, 3)
        first, second = _random_stats(rng, 3), _random_stats(rng, 3)
        sequential = update_posterior(update_posterior(prior, first), second)
        assert sequential == update_posterior(prior, first + second)


def test_update_posterior_formula() -> None:
    _check_update_formula(10_000)


@pytest.mark.slow
def test_update_posterior_formula_full() -> None:
    _check_update_formula(100_000)
    _check_additivity(100_000)


def test_update_posterior_is_additive() -> None:
    _check_additivity(2_000)


def test_update_posterior_rejects_mismatched_arms() -> None:
    with pytest.raises(InvalidStatsError):
        update_posterior(BetaPosterior.uniform(2), SufficientStats.zeros(3))


def test_zero_stats_leave_prior_unchanged() -> None:
    prior = BetaPosterior(alpha=(2.0, 0.5), beta=(1.0, 3.0))
    assert update_posterior(prior, SufficientStats.zeros(2)) == prior


def test_posterior_from_config() -> None:
    config = ExperimentConfig(k=2, N=1, T=1, prior_alpha=(2.0, 1.0), prior_beta=(1.0, 5.0))
    post = BetaPosterior.from_config(config)
    assert posterior_mean(post, 0) == pytest.approx(2 / 3)
    assert posterior_mean(post, 1) == pytest.approx(1 / 6)


def test_beta_posterior_validation() -> None:
    with pytest.raises(ValueError):
        BetaPosterior(alpha=(1.0,), beta=(1.0, 1.0))
    with pytest.raises(ValueError):
        BetaPosterior(alpha=(0.0,), beta=(1.0,))


def test_beta_binomial_uniform_prior_is_discrete_uniform() -> None:
    assert beta_binomial_pmf(1.0, 1.0, 4, 2) == pytest.approx(0.2, abs=1e-14)
    np.testing.assert_allclose(beta_binomial_pmf_vector(1.0, 1.0, 9), 0.1, atol=1e-14)


def test_beta_binomial_normalisation() -> None:
    rng = np.random.default_rng(3)
    for n in range(0, 51):
        alpha, beta = rng.uniform(0.1, 50.0, size=2)
        assert abs(beta_binomial_pmf_vector(alpha, beta, n).sum() - 1.0) < 1e-12


def test_beta_binomial_large_parameters_stay_finite() -> None:
    pmf = beta_binomial_pmf_vector(5_000.5, 4_000.25, 50)
    assert np.isfinite(pmf).all()
    assert abs(pmf.sum() - 1.0) < 1e-10


@pytest.mark.parametrize(
    ("alpha", "beta", "n", "s"),
    [(0.0, 1.0, 2, 1), (1.0, -1.0, 2, 1), (1.0, 1.0, 2, 3), (1.0, 1.0, 2, -1)],
)
def test_beta_binomial_pmf_rejects(alpha: float, beta: float, n: int, s: int) -> None:
    with pytest.raises(ValueError):
        beta_binomial_pmf(alpha, beta, n, s)


def test_prob_best_exact_analytic_point() -> None:
    post = BetaPosterior(alpha=(2.0, 1.0), beta=(1.0, 2.0))
    assert prob_best_exact_2arm(post) == pytest.approx(5 / 6, abs=1e-9)


def test_prob_best_is_a_probability_vector() -> None:
    post = BetaPosterior(alpha=(3.0, 2.0, 5.0), beta=(4.0, 2.0, 1.0))
    p = prob_best(post, 2_000, np.random.default_rng(0))
    assert p.shape == (3,)
    assert p.sum() == 1.0
    assert (p >= 0).all()


def test_prob_best_sums_to_one_exactly() -> None:
    rng = np.random.default_rng(12)
    for _ in range(2_000):
        k = int(rng.integers(2, 7))
        post = BetaPosterior(
            alpha=tuple(rng.uniform(0.5, 20.0, size=k)),
            beta=tuple(rng.uniform(0.5, 20.0, size=k)),
        )
        draws = int(rng.integers(1, 50))
        p = prob_best(post, draws, rng)
        assert p.sum() == 1.0
        assert (p >= 0).all()
        top = int(np.argmax(p))
        assert abs(p[top] - round(p[top] * draws) / draws) < 1e-12


def test_prob_best_single_arm() -> None:
    np.testing.assert_array_equal(
        prob_best(BetaPosterior.uniform(1), 10, np.random.default_rng(0)), [1.0]
    )


def test_prob_best_is_reproducible() -> None:
    post = BetaPosterior(alpha=(3.0, 2.0), beta=(4.0, 2.0))
    first = prob_best(post, 1_000, np.random.default_rng(9))
    second = prob_best(post, 1_000, np.random.default_rng(9))
    np.testing.assert_array_equal(first, second)


def test_prob_best_symmetric_arms_near_half() -> None:
    p = prob_best(BetaPosterior.uniform(2), 100_000, np.random.default_rng(4))
    assert abs(p[0] - 0.5) < 4 * math.sqrt(0.25 / 100_000)


def _check_monte_carlo_against_quadrature(cases: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    draws = 100_000
    for _ in range(cases):
        alpha, beta = rng.uniform(0.5, 20.0, size=(2, 2))
        post = BetaPosterior(alpha=tuple(alpha), beta=tuple(beta))
        exact = prob_best_exact_2arm(post)
        estimate = prob_best(post, draws, rng)[0]
        tolerance = 4 * math.sqrt(exact * (1 - exact) / draws) + 1e-12
        assert abs(estimate - exact) < tolerance


def test_prob_best_agrees_with_quadrature() -> None:
    _check_monte_carlo_against_quadrature(cases=10, seed=11)


@pytest.mark.slow
def test_prob_best_agrees_with_quadrature_full() -> None:
    _check_monte_carlo_against_quadrature(cases=200, seed=12)


def test_expected_max_uniform_pair() -> None:
    assert expected_max(BetaPosterior.uniform(2)) == pytest.approx(2 / 3, abs=1e-10)
    assert expected_max(BetaPosterior.uniform(3)) == pytest.approx(3 / 4, abs=1e-10)


def test_expected_max_single_arm_is_mean() -> None:
    post = BetaPosterior(alpha=(3.0,), beta=(5.0,))
    assert expected_max(post) == pytest.approx(3 / 8, abs=1e-10)


@pytest.mark.parametrize(
    ("prior", "m", "r", "expected"),
    [
        ((1.0, 1.0), 10, 7, (8.0, 4.0)),
        ((1.0, 1.0), 0, 0, (1.0, 1.0)),
        ((2.0, 3.0), 5, 0, (2.0, 8.0)),
    ],
)
def test_update_posterior_cases(prior: tuple, m: int, r: int, expected: tuple) -> None:
    post = update_posterior(
        BetaPosterior(alpha=(prior[0],), beta=(prior[1],)), SufficientStats(m=(m,), r=(r,))
    )
    assert (post.alpha[0], post.beta[0]) == expected


def test_posterior_mean_cases() -> None:
    post = BetaPosterior(alpha=(8.0, 1.0, 1.0), beta=(4.0, 1.0, 3.0))
    assert [posterior_mean(post, d) for d in range(3)] == pytest.approx([8 / 12, 0.5, 0.25])


def test_beta_binomial_matches_moment_integral() -> None:
    moment, _ = integrate.quad(lambda x: x**3 * stats.beta.pdf(x, 8, 4), 0, 1, epsabs=1e-13)
    assert beta_binomial_pmf(8.0, 4.0, 3, 3) == pytest.approx(moment, abs=1e-10)
    assert beta_binomial_pmf(1.0, 1.0, 1, 1) == pytest.approx(0.5)


def test_prob_best_exact_symmetry_and_complement() -> None:
    assert prob_best_exact_2arm(BetaPosterior.uniform(2)) == pytest.approx(0.5, abs=1e-10)
    forward = prob_best_exact_2arm(BetaPosterior(alpha=(8.0, 4.0), beta=(4.0, 8.0)))
    backward = prob_best_exact_2arm(BetaPosterior(alpha=(4.0, 8.0), beta=(8.0, 4.0)))
    assert forward + backward == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        prob_best_exact_2arm(BetaPosterior.uniform(3))
