"""Chernoff-Hoeffding tail bounds, sample-size inversion and exact binomial TV.

All bounds are for sums of ``m`` independent variables in [0, 1].
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = ["additive_tail", "mult_tails", "additive_sample_size", "binomial_tv", "binomial_logpmf"]


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside (0, 1]")


def additive_tail(m: int, gamma: float) -> float:
    """One-sided bound ``exp(-2 gamma^2 m)`` on deviating by more than ``gamma * m``.

    Double it for the two-sided statement.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_gamma(gamma)
    return math.exp(-2.0 * gamma * gamma * m)


def mult_tails(m: int, gamma: float, p_low: float, p_high: float) -> tuple[float, float]:
    """Multiplicative bounds when only ``p_low <= E[sum] <= p_high`` is known.

    Returns ``(upper, lower)`` where ``upper`` bounds ``P[sum > (1+gamma) p_high]``
    by ``exp(-gamma^2 p_high / 3)`` and ``lower`` bounds
    ``P[sum < (1-gamma) p_low]`` by ``exp(-gamma^2 p_low / 2)``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_gamma(gamma)
    if p_low < 0:
        raise ValueError("p_low must be nonnegative")
    if p_low > p_high:
        raise ValueError(f"p_low={p_low} exceeds p_high={p_high}")
    return math.exp(-gamma * gamma * p_high / 3.0), math.exp(-gamma * gamma * p_low / 2.0)


def additive_sample_size(gamma: float, delta: float) -> int:
    """Smallest ``m`` with ``2 exp(-2 gamma^2 m) <= delta``."""
    _check_gamma(gamma)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")
    m = math.ceil(math.log(2.0 / delta) / (2.0 * gamma * gamma))
    # guard against the ceil landing one short through rounding
    while 2.0 * math.exp(-2.0 * gamma * gamma * m) > delta:
        m += 1
    return max(m, 1)


def binomial_logpmf(m: int, p: float) -> np.ndarray:
    """log P[Bin(m, p) = k] for ``k = 0..m``, computed in log space."""
    k = np.arange(m + 1)
    logcoef = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if p == 0.0:
            return np.where(k == 0, 0.0, -np.inf)
        if p == 1.0:
            return np.where(k == m, 0.0, -np.inf)
        return logcoef + k * math.log(p) + (m - k) * math.log1p(-p)


def binomial_tv(m: int, p: float, epsilon: float) -> float:
    """Exact ``d_TV(Bin(m, p), Bin(m, p + epsilon))`` by summation over ``0..m``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > 10_000:
        raise ValueError("exact summation is limited to m <= 10^4")
    q = p + epsilon
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"p={p} and p+epsilon={q} must both lie in [0, 1]")
    a = np.exp(binomial_logpmf(m, p))
    b = np.exp(binomial_logpmf(m, q))
    return min(1.0, 0.5 * math.fsum(np.abs(a - b)))
