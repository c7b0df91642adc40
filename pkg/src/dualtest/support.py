"""Additive support-size estimation under dual access.

Given the promise that every element of the support has mass at least 1/n,
estimates ``|{x : D(x) >= 1/n}|`` to within ``epsilon * n``.

Two regimes, picked from ``(n, epsilon)`` alone:

* ``epsilon > 2 / sqrt(n ln(3n))``: average ``1{D(x) >= 1/n} / D(x)`` over
  ``m = ceil(4 / epsilon^2)`` sampled points (one EVAL each) and round up.
  The terms lie in ``[0, n]`` and their mean is the support size.
* otherwise: draw ``m = ceil(n ln(3n))`` samples, no EVAL at all, and count
  distinct elements. Every support element is seen with probability >= 2/3.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from dualtest.oracles import DualOracle, QueryStats

__all__ = [
    "Regime",
    "SupportEstimate",
    "choose_regime",
    "support_sample_size",
    "estimate_support",
    "verify_min_mass_promise",
]


class Regime(str, enum.Enum):
    EXPECTATION = "expectation"
    COUPON_COLLECTOR = "coupon-collector"


@dataclass(frozen=True)
class SupportEstimate:
    k_hat: int
    regime: Regime
    m: int
    stats: QueryStats


def choose_regime(n: int, epsilon: float) -> Regime:
    if epsilon > 2.0 / math.sqrt(n * math.log(3 * n)):
        return Regime.EXPECTATION
    return Regime.COUPON_COLLECTOR


def support_sample_size(n: int, epsilon: float) -> int:
    if choose_regime(n, epsilon) is Regime.EXPECTATION:
        return math.ceil(4.0 / (epsilon * epsilon))
    return math.ceil(n * math.log(3 * n))


def estimate_support(oracle: DualOracle, epsilon: float) -> SupportEstimate:
    """Estimate the number of elements with mass >= 1/n, to within ``epsilon * n`` w.p. >= 2/3."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon} outside (0, 1)")
    n = oracle.n
    regime = choose_regime(n, epsilon)
    m = support_sample_size(n, epsilon)
    drawn = oracle.samp_many(m)
    if regime is Regime.EXPECTATION:
        masses = oracle.eval_many(drawn)
        heavy = masses >= 1.0 / n
        terms = np.zeros_like(masses)
        terms[heavy] = 1.0 / masses[heavy]
        k_hat = math.ceil(float(terms.mean()))
    else:
        k_hat = int(np.unique(drawn).size)
    # the true count never exceeds n, so clamping can only help
    return SupportEstimate(min(k_hat, n), regime, m, oracle.stats.snapshot())


def verify_min_mass_promise(oracle: DualOracle) -> bool:
    """Exhaustively check that every element has mass 0 or >= 1/n.

    Costs ``n`` EVAL queries; meant for fixtures, not for algorithms.
    """
    n = oracle.n
    masses = oracle.eval_many(np.arange(1, n + 1))
    return bool(np.all((masses == 0) | (masses >= 1.0 / n)))
