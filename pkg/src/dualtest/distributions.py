"""Explicit finite distributions over [n] and exact brute-force quantities.

Everything in here is ground truth: the sublinear algorithms elsewhere in the
package only ever see a distribution through an oracle, and their outputs are
validated against the functions below.

Indexing is 1-based at every public boundary (``pmf_at(1)`` is the first
element of the domain); the backing array is 0-based.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "ExplicitDistribution",
    "PrefixCdf",
    "tv_distance",
    "entropy_exact",
    "support_size_exact",
    "is_monotone_nonincreasing",
    "binary_entropy",
    "entropy_diff_bound",
    "uniform",
    "point_mass",
    "uniform_on_prefix",
    "random_distribution",
    "random_monotone",
    "load_distribution",
    "save_distribution",
]

SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ExplicitDistribution:
    """Dense probability mass function over ``[n] = {1, ..., n}``.

    Parameters
    ----------
    pmf : array_like
        The ``n`` probabilities. Entries must be nonnegative and sum to 1
        within ``1e-9``.
    renormalize : bool
        Divide by the total before validating. Off by default so that a
        generator producing a slightly wrong total fails loudly.
    """

    pmf: np.ndarray
    n: int = field(init=False)

    def __init__(self, pmf: Sequence[float] | np.ndarray, renormalize: bool = False):
        arr = np.array(pmf, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ValueError("pmf must have at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pmf entries must be finite")
        if np.any(arr < 0):
            raise ValueError("pmf entries must be nonnegative")
        if renormalize:
            total = arr.sum()
            if total <= 0:
                raise ValueError("cannot renormalize a pmf with zero total mass")
            arr = arr / total
        total = math.fsum(arr)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"pmf sums to {total!r}, not 1 (tolerance {SUM_TOL})")
        arr.setflags(write=False)
        object.__setattr__(self, "pmf", arr)
        object.__setattr__(self, "n", int(arr.size))

    def pmf_at(self, i: int) -> float:
        """Mass D(i) of the 1-based element ``i``."""
        if not 1 <= i <= self.n:
            raise IndexError(f"element {i} outside [1, {self.n}]")
        return float(self.pmf[i - 1])

    def prefix_cdf(self) -> PrefixCdf:
        return PrefixCdf.from_distribution(self)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExplicitDistribution):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.pmf, other.pmf))

    def __hash__(self) -> int:
        return hash((self.n, self.pmf.tobytes()))

    def __repr__(self) -> str:
        return f"ExplicitDistribution(n={self.n})"

    def to_json(self) -> dict:
        return {"n": self.n, "pmf": [float(x) for x in self.pmf]}

    @classmethod
    def from_json(cls, obj: dict) -> ExplicitDistribution:
        if "n" not in obj or "pmf" not in obj:
            raise ValueError("distribution JSON needs keys 'n' and 'pmf'")
        n = int(obj["n"])
        if len(obj["pmf"]) != n:
            raise ValueError(f"'n' is {n} but 'pmf' has {len(obj['pmf'])} entries")
        return cls(obj["pmf"])

    def to_bytes(self) -> bytes:
        return struct.pack("<Q", self.n) + self.pmf.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> ExplicitDistribution:
        if len(data) < 8:
            raise ValueError("binary distribution is shorter than its 8-byte header")
        (n,) = struct.unpack_from("<Q", data, 0)
        if len(data) != 8 + 8 * n:
            raise ValueError(f"header says n={n}, payload has {(len(data) - 8) / 8} doubles")
        return cls(np.frombuffer(data, dtype="<f8", offset=8, count=n))


@dataclass(frozen=True, eq=False)
class PrefixCdf:
    """Cumulative masses ``cdf[j] = D([j])`` for ``j = 1..n``.

    ``at(0)`` is defined as 0 so that ``at(j) - at(j - 1)`` recovers D(j).
    The last entry is pinned to exactly 1 to absorb floating-point drift.
    """

    cdf: np.ndarray
    n: int

    @classmethod
    def from_distribution(cls, d: ExplicitDistribution) -> PrefixCdf:
        cdf = np.cumsum(d.pmf)
        cdf = np.minimum(cdf, 1.0)
        cdf[-1] = 1.0
        # cumsum is already nondecreasing for nonnegative input; the clamp keeps it so.
        cdf.setflags(write=False)
        return cls(cdf=cdf, n=d.n)

    def at(self, j: int) -> float:
        if j == 0:
            return 0.0
        if not 1 <= j <= self.n:
            raise IndexError(f"prefix {j} outside [0, {self.n}]")
        return float(self.cdf[j - 1])


def _check_same_domain(d1: ExplicitDistribution, d2: ExplicitDistribution) -> None:
    if d1.n != d2.n:
        raise ValueError(f"domain sizes differ: {d1.n} vs {d2.n}")


def tv_distance(d1: ExplicitDistribution, d2: ExplicitDistribution) -> float:
    """Total variation distance, half the L1 distance between the pmfs."""
    _check_same_domain(d1, d2)
    value = 0.5 * math.fsum(np.abs(d1.pmf - d2.pmf))
    return min(1.0, max(0.0, value))


def entropy_exact(d: ExplicitDistribution) -> float:
    """Shannon entropy in bits, with 0 log(1/0) = 0."""
    p = d.pmf[d.pmf > 0]
    h = -math.fsum(p * np.log2(p))
    return max(0.0, h)


def support_size_exact(d: ExplicitDistribution, threshold: float) -> int:
    """Number of elements carrying mass at least ``threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return int(np.count_nonzero(d.pmf >= threshold))


def is_monotone_nonincreasing(d: ExplicitDistribution) -> bool:
    return bool(np.all(np.diff(d.pmf) <= 0))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy_diff_bound(alpha: float, n: int) -> float:
    """Upper bound on |H(D1) - H(D2)| when tv(D1, D2) <= alpha on [n].

    Returns ``alpha * log2(n - 1) + h2(alpha)``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if n < 2:
        raise ValueError("n must be at least 2")
    return alpha * math.log2(n - 1) + binary_entropy(alpha)


# -- constructors ---------------------------------------------------------------


def uniform(n: int) -> ExplicitDistribution:
    if n < 1:
        raise ValueError("n must be positive")
    return ExplicitDistribution(np.full(n, 1.0 / n))


def point_mass(n: int, at: int = 1) -> ExplicitDistribution:
    if not 1 <= at <= n:
        raise ValueError(f"atom {at} outside [1, {n}]")
    pmf = np.zeros(n)
    pmf[at - 1] = 1.0
    return ExplicitDistribution(pmf)


def uniform_on_prefix(n: int, k: int) -> ExplicitDistribution:
    """Uniform over the first ``k`` elements of ``[n]``."""
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    pmf = np.zeros(n)
    pmf[:k] = 1.0 / k
    return ExplicitDistribution(pmf)


def random_distribution(n: int, rng: np.random.Generator, concentration: float = 1.0) -> ExplicitDistribution:
    """Dirichlet(concentration, ..., concentration) draw over ``[n]``."""
    return ExplicitDistribution(rng.dirichlet(np.full(n, concentration)), renormalize=True)


def random_monotone(n: int, rng: np.random.Generator, concentration: float = 1.0) -> ExplicitDistribution:
    """Random distribution with its pmf sorted into nonincreasing order."""
    pmf = np.sort(rng.dirichlet(np.full(n, concentration)))[::-1]
    return ExplicitDistribution(pmf, renormalize=True)


# -- file formats ---------------------------------------------------------------


def save_distribution(d: ExplicitDistribution, path: str | Path) -> None:
    """Write ``d`` as JSON, or as the little-endian binary layout for ``.bin`` paths."""
    path = Path(path)
    if path.suffix == ".bin":
        path.write_bytes(d.to_bytes())
    else:
        path.write_text(json.dumps(d.to_json()))


def load_distribution(path: str | Path) -> ExplicitDistribution:
    path = Path(path)
    if path.suffix == ".bin":
        return ExplicitDistribution.from_bytes(path.read_bytes())
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed distribution JSON ({exc})") from exc
    return ExplicitDistribution.from_json(obj)
