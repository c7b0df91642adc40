"""Additive entropy estimation under dual and cumulative dual access.

General distributions (SAMP + EVAL): average ``log2(1/D(s)) * 1{D(s) >= tau}``
over sampled points. Dropping the points below the cutoff ``tau`` loses at
most ``n tau log2(1/tau) <= delta/2`` bits and caps the range of each term at
``log2(1/tau)``, which is what makes the sample size independent of the tail.

Monotone distributions (SAMP + CEVAL): estimate the entropy of the flattened
distribution over an oblivious decomposition with ``alpha = Theta(delta /
log n)``. The flattened entropy is an expectation over intervals,
``E_{k ~ D}[log2(|I_k| / D(I_k))]``, and the interval masses come from two
CEVAL queries each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dualtest.decomposition import FlattenedOracle, ObliviousDecomposition, birge_decomposition
from dualtest.oracles import CumulativeDualOracle, DualOracle, QueryStats

__all__ = [
    "EntropyEstimate",
    "entropy_cutoff",
    "entropy_sample_size",
    "robust_entropy_cutoff",
    "entropy_noise_budget",
    "estimate_entropy",
    "estimate_entropy_robust",
    "monotone_alpha",
    "monotone_cutoff",
    "monotone_sample_size",
    "MonotonePlan",
    "plan_monotone",
    "estimate_entropy_monotone",
]

LN6 = math.log(6.0)
_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    delta: float
    tau: float
    m: int
    stats: QueryStats
    extras: dict = field(default_factory=dict)


def _check_delta(n: int, delta: float) -> None:
    if not 0.0 < delta < n / 2.0:
        raise ValueError(f"delta={delta} outside (0, n/2) for n={n}")


def entropy_cutoff(n: int, delta: float, constant: float = 10.0) -> float:
    """``tau = (delta/n) / (constant * log2(n/delta))``."""
    _check_delta(n, delta)
    return (delta / n) / (constant * math.log2(n / delta))


def entropy_sample_size(delta: float, tau: float) -> int:
    """``m = ceil(ln 6 / delta^2 * log2(1/tau)^2)``."""
    return math.ceil(LN6 / (delta * delta) * math.log2(1.0 / tau) ** 2)


def robust_entropy_cutoff(n: int, delta: float) -> float:
    return entropy_cutoff(n, delta, constant=30.0)


def entropy_noise_budget(delta: float) -> float:
    """``min(2^(delta/3) - 1, 1)``: the EVAL noise the robust estimator absorbs."""
    return min(2.0 ** (delta / 3.0) - 1.0, 1.0)


def _cutoff_average(masses: np.ndarray, tau: float) -> float:
    keep = masses >= tau
    terms = np.zeros_like(masses)
    # noise can push a mass above 1; a negative log would only move further from H >= 0
    terms[keep] = np.maximum(0.0, -np.log2(masses[keep]))
    return float(terms.mean())


def estimate_entropy(oracle: DualOracle, delta: float) -> EntropyEstimate:
    """Estimate H(D) in bits; w.p. >= 2/3 the value lies in ``[H - delta, H + delta/2]``."""
    n = oracle.n
    tau = entropy_cutoff(n, delta)
    m = entropy_sample_size(delta, tau)
    drawn = oracle.samp_many(m)
    value = _cutoff_average(oracle.eval_many(drawn), tau)
    return EntropyEstimate(value, delta, tau, m, oracle.stats.snapshot())


def estimate_entropy_robust(oracle: DualOracle, delta: float) -> EntropyEstimate:
    """:func:`estimate_entropy` with a smaller cutoff, tolerating (1+gamma) EVAL noise.

    ``gamma`` may be up to :func:`entropy_noise_budget`; larger noise raises.
    """
    n = oracle.n
    tau = robust_entropy_cutoff(n, delta)
    budget = entropy_noise_budget(delta)
    if oracle.noise is not None and oracle.noise.tau > budget * (1.0 + 1e-12):
        raise ValueError(f"oracle noise {oracle.noise.tau} exceeds the tolerated {budget}")
    m = entropy_sample_size(delta, tau)
    drawn = oracle.samp_many(m)
    value = _cutoff_average(oracle.eval_many(drawn), tau)
    return EntropyEstimate(value, delta, tau, m, oracle.stats.snapshot(), {"noise_budget": budget})


# -- monotone distributions -------------------------------------------------------


def _largest_below(f, bound: float, lo: float, hi: float) -> float:
    """Largest x in [lo, hi] with f(x) <= bound, for f nondecreasing on [lo, hi]."""
    if f(hi) <= bound:
        return hi
    while hi - lo > _BISECT_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) <= bound:
            lo = mid
        else:
            hi = mid
    return lo


def monotone_alpha(n: int, delta: float) -> float:
    """Largest ``alpha`` in (0, 1] with ``alpha (log2(n/alpha) + 2) <= delta/2``.

    This keeps ``|H(D) - H(flattened D)| <= delta/2`` for monotone D.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    return _largest_below(lambda a: a * (math.log2(n / a) + 2.0), delta / 2.0, 0.0, 1.0)


def monotone_cutoff(n: int, delta: float) -> float:
    """Largest cutoff ``tau <= 1/e`` on flattened point masses with ``n tau log2(1/tau) <= delta/4``.

    A point of mass ``d < tau`` contributes ``d log2(1/d) < tau log2(1/tau)``
    to the flattened entropy, so dropping every interval whose per-point mass
    ``d_k`` is below ``tau`` costs at most ``delta/4``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    return _largest_below(lambda t: n * t * math.log2(1.0 / t), delta / 4.0, 0.0, 1.0 / math.e)


def monotone_sample_size(delta: float, term_range: float) -> int:
    """Chernoff inversion for accuracy ``delta/4`` on terms in ``[0, term_range]``."""
    return math.ceil(8.0 * LN6 * term_range * term_range / (delta * delta))


@dataclass(frozen=True)
class MonotonePlan:
    alpha: float
    decomposition: ObliviousDecomposition
    tau: float
    term_range: float
    m: int


def plan_monotone(n: int, delta: float) -> MonotonePlan:
    """All distribution-independent choices of the monotone estimator."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    alpha = monotone_alpha(n, delta)
    dec = birge_decomposition(n, alpha)
    tau = monotone_cutoff(n, delta)
    # kept terms are log2(1/d_k) with tau <= d_k <= 1
    term_range = max(math.log2(1.0 / tau), 1.0)
    return MonotonePlan(alpha, dec, tau, term_range, monotone_sample_size(delta, term_range))


def estimate_entropy_monotone(oracle: CumulativeDualOracle, delta: float) -> EntropyEstimate:
    """Estimate H(D) to within ``delta`` for monotone (or nearly monotone) D.

    Uses ``m`` SAMP queries plus at most two CEVAL queries per distinct
    interval sampled; interval masses are cached within the call.
    """
    n = oracle.n
    plan = plan_monotone(n, delta)
    flat = FlattenedOracle(oracle, plan.decomposition)
    ks = flat.samp_intervals(plan.m)
    uniq, counts = np.unique(ks, return_counts=True)
    masses = np.array([flat.mass_interval(int(k)) for k in uniq])
    lengths = np.asarray(plan.decomposition.lengths, dtype=np.float64)[uniq - 1]
    point = masses / lengths
    keep = point >= plan.tau
    terms = np.zeros_like(masses)
    terms[keep] = -np.log2(point[keep])
    value = float(np.dot(terms, counts) / plan.m)
    extras = {"alpha": plan.alpha, "intervals": len(plan.decomposition), "term_range": plan.term_range}
    return EntropyEstimate(value, delta, plan.tau, plan.m, oracle.stats.snapshot(), extras)
