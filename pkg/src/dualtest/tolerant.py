"""Tolerant testing by estimating total variation distance as an expectation.

For a reference distribution R and an unknown D,

    tv(D, R) = E_{x ~ D}[(1 - R(x)/D(x)) * 1{D(x) > R(x)}],

and every term lies in [0, 1]. Averaging ``m`` such terms over SAMP draws
(one EVAL each) therefore estimates tv to within ``gamma`` with probability at
least ``1 - 2 exp(-2 gamma^2 m)``. Taking ``m = ceil(ln 6 / (2 gamma^2))``
makes that failure probability at most 1/3; a tolerant tester for
``(eps1, eps2)`` uses ``gamma = (eps2 - eps1) / 2`` and accepts iff the
estimate is at most ``(eps1 + eps2) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dualtest.distributions import ExplicitDistribution
from dualtest.equivalence import Decision, Verdict
from dualtest.oracles import DualOracle, QueryStats

__all__ = [
    "ToleranceParams",
    "tolerance_params",
    "samples_for_accuracy",
    "estimate_l1_to_uniform",
    "estimate_l1_to_known",
    "estimate_l1_unknown_pair",
    "estimate_l1_eval_only",
    "tolerant_test_uniformity",
    "tolerant_test_identity",
    "tolerant_test_closeness",
    "robust_noise_budget",
    "tolerant_test_robust",
    "NoiseBudgetExceeded",
]

LN6 = math.log(6.0)


class NoiseBudgetExceeded(ValueError):
    """The oracle's noise is larger than the algorithm can absorb."""


def samples_for_accuracy(gamma: float) -> int:
    """``ceil(ln 6 / (2 gamma^2))``: samples for +-gamma with probability >= 2/3."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return math.ceil(LN6 / (2.0 * gamma * gamma))


@dataclass(frozen=True)
class ToleranceParams:
    eps1: float
    eps2: float
    gamma: float
    m: int

    @property
    def threshold(self) -> float:
        return (self.eps1 + self.eps2) / 2.0


def tolerance_params(eps1: float, eps2: float) -> ToleranceParams:
    if not 0.0 <= eps1 < eps2 <= 1.0:
        raise ValueError(f"need 0 <= eps1 < eps2 <= 1, got eps1={eps1}, eps2={eps2}")
    gamma = (eps2 - eps1) / 2.0
    return ToleranceParams(eps1, eps2, gamma, samples_for_accuracy(gamma))


def _check_m(m: int) -> None:
    if m < 1:
        raise ValueError("m must be at least 1")


def _excess_terms(unknown: np.ndarray, reference: np.ndarray) -> np.ndarray:
    # unknown > 0 wherever the indicator fires, since sampled points carry mass
    out = np.zeros_like(unknown)
    fire = unknown > reference
    out[fire] = 1.0 - reference[fire] / unknown[fire]
    return out


def _estimate_against(oracle: DualOracle, reference_pmf: np.ndarray, m: int) -> float:
    drawn = oracle.samp_many(m)
    terms = _excess_terms(oracle.eval_many(drawn), reference_pmf[drawn - 1])
    return float(min(1.0, max(0.0, terms.mean())))


def estimate_l1_to_known(oracle: DualOracle, d_star: ExplicitDistribution, m: int) -> float:
    """Unbiased estimate of ``tv(D, d_star)`` from ``m`` SAMP and ``m`` EVAL queries."""
    _check_m(m)
    if d_star.n != oracle.n:
        raise ValueError(f"domain sizes differ: oracle has {oracle.n}, d_star has {d_star.n}")
    return _estimate_against(oracle, d_star.pmf, m)


def estimate_l1_to_uniform(oracle: DualOracle, m: int) -> float:
    """Unbiased estimate of ``tv(D, U_n)``; the terms are ``(1 - 1/(n D(s))) 1{D(s) > 1/n}``."""
    _check_m(m)
    return _estimate_against(oracle, np.full(oracle.n, 1.0 / oracle.n), m)


def estimate_l1_unknown_pair(o1: DualOracle, o2: DualOracle, m: int) -> float:
    """Unbiased estimate of ``tv(D1, D2)``: ``m`` draws from D1, one EVAL on each side per draw."""
    _check_m(m)
    if o1.n != o2.n:
        raise ValueError(f"domain sizes differ: {o1.n} vs {o2.n}")
    drawn = o1.samp_many(m)
    terms = _excess_terms(o1.eval_many(drawn), o2.eval_many(drawn))
    return float(min(1.0, max(0.0, terms.mean())))


def estimate_l1_eval_only(oracle: DualOracle, m: int, rng: np.random.Generator | int | None = None) -> float:
    """Estimate ``tv(D, U_n)`` with EVAL queries only.

    Points are drawn uniformly by the algorithm itself (free), and each
    contributes ``|n D(x) - 1| * 1{D(x) < 1/n}``, whose mean under the uniform
    distribution is exactly ``tv(D, U_n)``. Internal draws use ``rng`` when
    given, else ``oracle.aux_rng``.
    """
    _check_m(m)
    rng = oracle.aux_rng if rng is None else np.random.default_rng(rng)
    n = oracle.n
    points = rng.integers(1, n + 1, size=m)
    scaled = n * oracle.eval_many(points)
    terms = np.where(scaled < 1.0, 1.0 - scaled, 0.0)
    return float(min(1.0, max(0.0, terms.mean())))


def _verdict(estimate: float, threshold: float, stats: QueryStats) -> Verdict:
    # the accept rule is inclusive: an estimate exactly on the threshold accepts
    decision = Decision.ACCEPT if estimate <= threshold else Decision.REJECT
    return Verdict(decision, stats, statistic=estimate)


def tolerant_test_uniformity(oracle: DualOracle, eps1: float, eps2: float) -> Verdict:
    """Accept if ``tv(D, U) <= eps1``, reject if ``tv(D, U) >= eps2`` (each w.p. >= 2/3)."""
    params = tolerance_params(eps1, eps2)
    d_hat = estimate_l1_to_uniform(oracle, params.m)
    return _verdict(d_hat, params.threshold, oracle.stats.snapshot())


def tolerant_test_identity(oracle: DualOracle, d_star: ExplicitDistribution, eps1: float, eps2: float) -> Verdict:
    params = tolerance_params(eps1, eps2)
    d_hat = estimate_l1_to_known(oracle, d_star, params.m)
    return _verdict(d_hat, params.threshold, oracle.stats.snapshot())


def tolerant_test_closeness(o1: DualOracle, o2: DualOracle, eps1: float, eps2: float) -> Verdict:
    params = tolerance_params(eps1, eps2)
    d_hat = estimate_l1_unknown_pair(o1, o2, params.m)
    stats = QueryStats(
        o1.stats.samp_count + o2.stats.samp_count,
        o1.stats.eval_count + o2.stats.eval_count,
        o1.stats.ceval_count + o2.stats.ceval_count,
    )
    return _verdict(d_hat, params.threshold, stats)


def robust_noise_budget(eps1: float, eps2: float, *, unknown_pair: bool = False) -> float:
    """Largest EVAL noise ``tau`` the robust tester accepts.

    ``(eps2 - eps1) / 4`` against a known reference, ``(eps2 - eps1) / 8`` when
    both sides are unknown (and both may be noisy).
    """
    gap = eps2 - eps1
    return gap / 8.0 if unknown_pair else gap / 4.0


def _noise_tau(oracle: DualOracle) -> float:
    return 0.0 if oracle.noise is None else oracle.noise.tau


def tolerant_test_robust(
    oracle: DualOracle,
    reference: ExplicitDistribution | DualOracle,
    eps1: float,
    eps2: float,
) -> Verdict:
    """Tolerant identity/closeness test that survives multiplicative EVAL noise.

    ``reference`` is either a known distribution or a second (possibly noisy)
    oracle. The terms use the noisy answers in both the ratio and the
    indicator. A noise of ``tau`` moves each term by at most about ``tau``
    (``2 tau`` for a noisy pair), so the budget keeps that shift within half
    of the ``(eps2 - eps1) / 2`` margin. The sample size is the noiseless
    tester's, so without noise the verdicts coincide seed for seed.
    """
    params = tolerance_params(eps1, eps2)
    pair = isinstance(reference, DualOracle)
    budget = robust_noise_budget(eps1, eps2, unknown_pair=pair)
    taus = [_noise_tau(oracle)] + ([_noise_tau(reference)] if pair else [])
    # slack so a noise level equal to the budget is not refused over a rounding error
    if max(taus) > budget * (1.0 + 1e-12):
        raise NoiseBudgetExceeded(f"oracle noise {max(taus)} exceeds the tolerated {budget}")
    m = params.m

    if pair:
        d_hat = estimate_l1_unknown_pair(oracle, reference, m)
        stats = QueryStats(
            oracle.stats.samp_count + reference.stats.samp_count,
            oracle.stats.eval_count + reference.stats.eval_count,
            oracle.stats.ceval_count + reference.stats.ceval_count,
        )
    else:
        d_hat = estimate_l1_to_known(oracle, reference, m)
        stats = oracle.stats.snapshot()
    return _verdict(d_hat, params.threshold, stats)
