"""Non-tolerant uniformity, identity and closeness testers under dual access.

Mechanism shared by all three: draw ``m = ceil(c / eps)`` points from each
side that can be sampled, look up both masses at every drawn point, and
reject as soon as some point ``x`` drawn from side A has
``mass_B(x) < (1 - eps/2) * mass_A(x)``.

If ``tv(D_A, D_B) >= eps`` then the set ``{x : D_B(x) <= (1 - eps/2) D_A(x)}``
carries at least ``eps/2`` of D_A's mass, so ``m = ceil(8/eps)`` draws hit it
with probability at least ``1 - exp(-4)``. When the two distributions are
equal and the oracles are exact the rejection predicate can never fire.

Query cost per call: identity/uniformity use ``m`` SAMP and ``2m`` EVAL;
closeness uses ``2m`` SAMP and ``4m`` EVAL. With the default constant 8 that
is at most ``24/eps + 6`` queries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from dualtest.distributions import ExplicitDistribution, uniform
from dualtest.oracles import DualOracle, QueryStats

__all__ = [
    "Decision",
    "Verdict",
    "sample_count",
    "test_identity_known",
    "test_uniformity",
    "test_closeness",
]

DEFAULT_SAMPLE_CONSTANT = 8.0


class Decision(str, enum.Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    stats: QueryStats
    witness: int | None = None
    statistic: float | None = None

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} outside (0, 1]")


def sample_count(epsilon: float, constant: float = DEFAULT_SAMPLE_CONSTANT) -> int:
    _check_epsilon(epsilon)
    return math.ceil(constant / epsilon)


def _first_violation(points: np.ndarray, mass_from: np.ndarray, mass_other: np.ndarray, factor: float) -> int | None:
    bad = np.flatnonzero(mass_other < factor * mass_from)
    return int(points[bad[0]]) if bad.size else None


def test_identity_known(
    oracle: DualOracle,
    d_star: ExplicitDistribution,
    epsilon: float,
    *,
    constant: float = DEFAULT_SAMPLE_CONSTANT,
    violation_factor: float | None = None,
    rng: np.random.Generator | int | None = None,
) -> Verdict:
    """Test ``D == d_star`` against ``tv(D, d_star) >= epsilon``.

    ``d_star`` is sampled internally by inverse CDF; those draws cost no
    oracle queries. They use ``rng`` when given, else ``oracle.aux_rng``.
    """
    _check_epsilon(epsilon)
    if d_star.n != oracle.n:
        raise ValueError(f"domain sizes differ: oracle has {oracle.n}, d_star has {d_star.n}")
    factor = 1.0 - epsilon / 2.0 if violation_factor is None else violation_factor
    m = sample_count(epsilon, constant)
    rng = oracle.aux_rng if rng is None else np.random.default_rng(rng)

    drawn = oracle.samp_many(m)
    unknown_at_drawn = oracle.eval_many(drawn)
    star_drawn = np.searchsorted(d_star.prefix_cdf().cdf, rng.random(m), side="right").astype(np.int64) + 1
    unknown_at_star = oracle.eval_many(star_drawn)

    witness = _first_violation(drawn, unknown_at_drawn, d_star.pmf[drawn - 1], factor)
    if witness is None:
        witness = _first_violation(star_drawn, d_star.pmf[star_drawn - 1], unknown_at_star, factor)
    decision = Decision.ACCEPT if witness is None else Decision.REJECT
    return Verdict(decision, oracle.stats.snapshot(), witness)


def test_uniformity(oracle: DualOracle, epsilon: float, **kwargs) -> Verdict:
    """:func:`test_identity_known` against the uniform distribution on ``[n]``."""
    return test_identity_known(oracle, uniform(oracle.n), epsilon, **kwargs)


def test_closeness(
    o1: DualOracle,
    o2: DualOracle,
    epsilon: float,
    *,
    constant: float = DEFAULT_SAMPLE_CONSTANT,
    violation_factor: float | None = None,
) -> Verdict:
    """Test ``D1 == D2`` against ``tv(D1, D2) >= epsilon`` with both sides unknown.

    The procedure treats the two oracles identically, so swapping them does
    not change the acceptance probability.
    """
    _check_epsilon(epsilon)
    if o1.n != o2.n:
        raise ValueError(f"domain sizes differ: {o1.n} vs {o2.n}")
    factor = 1.0 - epsilon / 2.0 if violation_factor is None else violation_factor
    m = sample_count(epsilon, constant)

    from1 = o1.samp_many(m)
    from2 = o2.samp_many(m)
    w1 = _first_violation(from1, o1.eval_many(from1), o2.eval_many(from1), factor)
    w2 = _first_violation(from2, o2.eval_many(from2), o1.eval_many(from2), factor)
    witness = w1 if w1 is not None else w2
    decision = Decision.ACCEPT if witness is None else Decision.REJECT
    stats = QueryStats(
        o1.stats.samp_count + o2.stats.samp_count,
        o1.stats.eval_count + o2.stats.eval_count,
        o1.stats.ceval_count + o2.stats.ceval_count,
    )
    return Verdict(decision, stats, witness)
