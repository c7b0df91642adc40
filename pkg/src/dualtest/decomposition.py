"""Oblivious (Birge) interval decomposition of [n] and flattened distributions.

The partition depends only on ``(n, epsilon)``. Interval lengths follow
``floor(c * (1 + epsilon)^(k-1))`` for a scale ``c >= 1`` (``c = 1`` unless
the floors fall short of covering [n] within the interval budget), clamped so
that each length is at least the previous one and at most ``(1 + epsilon)``
times it plus one. The geometric run usually overshoots ``n``; the overshoot
is removed by lowering the largest lengths to a common cap, which preserves
both ordering constraints and never creates an empty interval.

The resulting partition satisfies:

* the intervals are consecutive and cover ``[n]`` exactly,
* lengths are nondecreasing with ``|I_{k+1}| <= (1 + epsilon) |I_k| + 1``,
* there are at most ``ceil(ln(epsilon n + 1) / ln(1 + epsilon)) + 1`` of them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from dualtest.distributions import ExplicitDistribution
from dualtest.oracles import CumulativeDualOracle, NoisyOracleError

__all__ = [
    "ObliviousDecomposition",
    "FlattenedDistribution",
    "FlattenedOracle",
    "birge_decomposition",
    "interval_count_bound",
    "flatten",
]

_FLOOR_SLACK = 1e-9


def interval_count_bound(n: int, epsilon: float) -> int:
    return math.ceil(math.log(epsilon * n + 1.0) / math.log1p(epsilon)) + 1


@dataclass(frozen=True)
class ObliviousDecomposition:
    n: int
    epsilon: float
    lengths: tuple[int, ...]

    @cached_property
    def ends(self) -> np.ndarray:
        """1-based inclusive right endpoints."""
        return np.cumsum(np.asarray(self.lengths, dtype=np.int64))

    @cached_property
    def starts(self) -> np.ndarray:
        return self.ends - np.asarray(self.lengths, dtype=np.int64) + 1

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(self.starts, self.ends)]

    def __len__(self) -> int:
        return len(self.lengths)

    def interval_of(self, x):
        """1-based index of the interval containing element(s) ``x``."""
        k = np.searchsorted(self.ends, x, side="left") + 1
        return int(k) if np.ndim(k) == 0 else k

    def to_json(self) -> str:
        return json.dumps([[a, b] for a, b in self.intervals])

    @classmethod
    def from_json(cls, text: str, epsilon: float = float("nan")) -> ObliviousDecomposition:
        pairs = json.loads(text)
        lengths = []
        expected = 1
        for a, b in pairs:
            if a != expected or b < a:
                raise ValueError(f"interval [{a}, {b}] does not continue the partition at {expected}")
            lengths.append(b - a + 1)
            expected = b + 1
        return cls(n=expected - 1, epsilon=epsilon, lengths=tuple(lengths))


def _geometric_lengths(n: int, epsilon: float, scale: float, limit: int) -> tuple[list[int], int]:
    lengths: list[int] = []
    total = 0
    growth = 1.0
    while total < n and len(lengths) < limit:
        size = max(1, math.floor(scale * growth + _FLOOR_SLACK))
        if lengths:
            prev = lengths[-1]
            size = max(prev, min(size, math.floor((1.0 + epsilon) * prev + 1.0 + _FLOOR_SLACK)))
        lengths.append(size)
        total += size
        growth *= 1.0 + epsilon
    return lengths, total


def _cap_to_total(lengths: list[int], n: int) -> list[int]:
    lo, hi = 1, max(lengths)
    while lo < hi:
        v = (lo + hi + 1) // 2
        if sum(min(s, v) for s in lengths) <= n:
            lo = v
        else:
            hi = v - 1
    capped = [min(s, lo) for s in lengths]
    # every interval above the cap had length > lo, so the leftovers fit one each at the tail
    for i in range(n - sum(capped)):
        capped[len(capped) - 1 - i] += 1
    return capped


def birge_decomposition(n: int, epsilon: float) -> ObliviousDecomposition:
    """Partition ``[n]`` into geometrically growing intervals with ratio ``1 + epsilon``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    limit = interval_count_bound(n, epsilon)
    lengths, total = _geometric_lengths(n, epsilon, 1.0, limit)
    if total < n:
        lo, hi = 1.0, float(n)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _geometric_lengths(n, epsilon, mid, limit)[1] >= n:
                hi = mid
            else:
                lo = mid
        lengths, total = _geometric_lengths(n, epsilon, hi, limit)
    return ObliviousDecomposition(n=n, epsilon=epsilon, lengths=tuple(_cap_to_total(lengths, n)))


@dataclass(frozen=True)
class FlattenedDistribution:
    decomposition: ObliviousDecomposition
    interval_masses: np.ndarray

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.decomposition.lengths, dtype=np.float64)

    @property
    def point_masses(self) -> np.ndarray:
        """``d_k = D(I_k) / |I_k|`` for each interval."""
        return self.interval_masses / self.lengths

    def to_distribution(self) -> ExplicitDistribution:
        pmf = np.repeat(self.point_masses, self.decomposition.lengths)
        return ExplicitDistribution(pmf)

    def entropy(self) -> float:
        """``sum_k D(I_k) log2(|I_k| / D(I_k))``, the entropy of the flattened pmf."""
        w = self.interval_masses
        keep = w > 0
        return float(math.fsum(w[keep] * np.log2(self.lengths[keep] / w[keep])))


def flatten(d: ExplicitDistribution, dec: ObliviousDecomposition) -> FlattenedDistribution:
    if d.n != dec.n:
        raise ValueError(f"distribution has n={d.n}, decomposition has n={dec.n}")
    masses = np.add.reduceat(d.pmf, dec.starts - 1)
    return FlattenedDistribution(dec, masses)


class FlattenedOracle:
    """Interval-level sampling and mass queries simulated from SAMP + CEVAL.

    ``samp_interval`` costs one SAMP query (draw ``x ~ D``, report its
    interval). ``mass_interval(k)`` costs two CEVAL queries, or one for the
    first interval.
    """

    def __init__(self, oracle: CumulativeDualOracle, dec: ObliviousDecomposition):
        if oracle.noise is not None:
            raise NoisyOracleError("flattened access needs an exact CEVAL oracle")
        if oracle.n != dec.n:
            raise ValueError(f"oracle has n={oracle.n}, decomposition has n={dec.n}")
        self.oracle = oracle
        self.decomposition = dec

    def samp_interval(self) -> int:
        return self.decomposition.interval_of(self.oracle.samp())

    def samp_intervals(self, m: int) -> np.ndarray:
        return self.decomposition.interval_of(self.oracle.samp_many(m))

    def mass_interval(self, k: int) -> float:
        dec = self.decomposition
        if not 1 <= k <= len(dec):
            raise IndexError(f"interval {k} outside [1, {len(dec)}]")
        upper = self.oracle.ceval(int(dec.ends[k - 1]))
        if k == 1:
            return upper
        return max(0.0, upper - self.oracle.ceval(int(dec.starts[k - 1]) - 1))

