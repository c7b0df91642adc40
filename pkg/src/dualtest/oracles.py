"""Query access to a hidden distribution, with exact per-oracle accounting.

Two access models are provided:

* :class:`DualOracle` -- ``samp()`` draws from D, ``eval(j)`` returns D(j).
* :class:`CumulativeDualOracle` -- ``samp()`` and ``ceval(j)`` returning D([j]).

Each instance owns its own random stream (seeded by the caller) and its own
:class:`QueryStats`. The batched ``samp_many`` / ``eval_many`` methods are
equivalent to the corresponding sequence of scalar calls: same answers, same
counter increments, same RNG consumption.

Sampling is inverse-CDF by binary search over the prefix sums, so one seed
gives one reproducible stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from dualtest.distributions import ExplicitDistribution, PrefixCdf

__all__ = [
    "QueryStats",
    "NoiseModel",
    "DualOracle",
    "CumulativeDualOracle",
    "eval_via_ceval",
    "NoisyOracleError",
]

# Maps (1-based indices, true masses) to multipliers in [1/(1+tau), 1+tau].
NoiseCallback = Callable[[np.ndarray, np.ndarray], np.ndarray]


class NoisyOracleError(RuntimeError):
    """An operation that needs exact answers was given a noisy oracle."""


@dataclass
class QueryStats:
    samp_count: int = 0
    eval_count: int = 0
    ceval_count: int = 0

    @property
    def total(self) -> int:
        return self.samp_count + self.eval_count + self.ceval_count

    def snapshot(self) -> QueryStats:
        return QueryStats(self.samp_count, self.eval_count, self.ceval_count)

    def as_dict(self) -> dict[str, int]:
        return {"samp": self.samp_count, "eval": self.eval_count, "ceval": self.ceval_count}


@dataclass(frozen=True)
class NoiseModel:
    """Multiplicative (1+tau) perturbation of EVAL answers.

    ``mode="random"`` draws the log-multiplier uniformly in
    ``[-log(1+tau), log(1+tau)]``. ``mode="adversarial"`` calls ``callback``
    with the queried indices and true masses and uses whatever multipliers it
    returns; they are checked against the envelope. Zero masses stay zero.
    """

    tau: float
    mode: Literal["random", "adversarial"] = "random"
    callback: NoiseCallback | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("noise tau must be positive")
        if self.mode not in ("random", "adversarial"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.mode == "adversarial" and self.callback is None:
            raise ValueError("adversarial noise needs a callback")

    def multipliers(self, idx: np.ndarray, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.mode == "random":
            half = math.log1p(self.tau)
            return np.exp(rng.uniform(-half, half, size=values.shape))
        factors = np.broadcast_to(np.asarray(self.callback(idx, values), dtype=np.float64), values.shape)
        lo, hi = 1.0 / (1.0 + self.tau), 1.0 + self.tau
        # small slack for callbacks that return exactly the envelope edge after rounding
        if np.any(factors < lo * (1 - 1e-12)) or np.any(factors > hi * (1 + 1e-12)):
            raise ValueError(f"noise callback returned a multiplier outside [{lo}, {hi}]")
        return np.clip(factors, lo, hi)

    @staticmethod
    def constant(tau: float, direction: Literal["up", "down"]) -> NoiseModel:
        """Adversary that always inflates (``"up"``) or deflates every answer by the full budget."""
        factor = 1.0 + tau if direction == "up" else 1.0 / (1.0 + tau)
        return NoiseModel(tau, "adversarial", lambda idx, v: np.full(np.shape(v), factor))


class _OracleBase:
    def __init__(self, distribution: ExplicitDistribution, seed: int | None = None):
        self._dist = distribution
        self._cdf = PrefixCdf.from_distribution(distribution)
        seq = np.random.SeedSequence(seed)
        sample_seq, noise_seq, aux_seq = seq.spawn(3)
        # noise draws come from their own stream so adding noise never shifts the samples
        self._rng = np.random.default_rng(sample_seq)
        self._noise_rng = np.random.default_rng(noise_seq)
        # an algorithm's own coins (internal draws that are not oracle queries)
        self.aux_rng = np.random.default_rng(aux_seq)
        self.stats = QueryStats()

    @property
    def n(self) -> int:
        return self._dist.n

    def samp(self) -> int:
        self.stats.samp_count += 1
        u = self._rng.random()
        return int(np.searchsorted(self._cdf.cdf, u, side="right")) + 1

    def samp_many(self, k: int) -> np.ndarray:
        """``k`` independent draws (1-based), counted as ``k`` SAMP queries."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        self.stats.samp_count += k
        u = self._rng.random(k)
        return np.searchsorted(self._cdf.cdf, u, side="right").astype(np.int64) + 1

    def _check_index(self, j) -> None:
        arr = np.asarray(j)
        if arr.size and (arr.min() < 1 or arr.max() > self.n):
            raise IndexError(f"query outside [1, {self.n}]")


class DualOracle(_OracleBase):
    """SAMP + EVAL access to a hidden distribution."""

    def __init__(self, distribution: ExplicitDistribution, seed: int | None = None, noise: NoiseModel | None = None):
        super().__init__(distribution, seed)
        self.noise = noise

    def eval(self, j: int) -> float:
        return float(self.eval_many(np.array([j]))[0])

    def eval_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        self._check_index(idx)
        self.stats.eval_count += idx.size
        values = self._dist.pmf[idx - 1]
        if self.noise is None or idx.size == 0:
            return values.copy()
        return values * self.noise.multipliers(idx, values, self._noise_rng)


class CumulativeDualOracle(_OracleBase):
    """SAMP + CEVAL access to a hidden distribution.

    Noise is accepted only so that code refusing noisy input can be exercised;
    noisy CEVAL answers themselves are not implemented.
    """

    def __init__(self, distribution: ExplicitDistribution, seed: int | None = None, noise: NoiseModel | None = None):
        super().__init__(distribution, seed)
        self.noise = noise

    def ceval(self, j: int) -> float:
        return float(self.ceval_many(np.array([j]))[0])

    def ceval_many(self, idx) -> np.ndarray:
        if self.noise is not None:
            raise NotImplementedError("noisy CEVAL answers are not defined")
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        self._check_index(idx)
        self.stats.ceval_count += idx.size
        return self._cdf.cdf[idx - 1].copy()


def eval_via_ceval(oracle: CumulativeDualOracle, j: int) -> float:
    """D(j) as ``ceval(j) - ceval(j - 1)``: two CEVAL queries, one when ``j == 1``."""
    if oracle.noise is not None:
        raise NoisyOracleError("EVAL cannot be simulated from a noisy CEVAL oracle")
    if not 1 <= j <= oracle.n:
        raise IndexError(f"query {j} outside [1, {oracle.n}]")
    upper = oracle.ceval(j)
    if j == 1:
        return upper
    return max(0.0, upper - oracle.ceval(j - 1))
