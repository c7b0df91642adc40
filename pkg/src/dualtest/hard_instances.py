"""Adversarial distribution families with exact certificates.

Each generator returns a :class:`HardInstance`: the distribution, the exact
value of the property it was built to exhibit (distance to uniform, entropy or
support size) computed in closed form from the construction, and enough
provenance to regenerate it. :meth:`HardInstance.verify` recomputes the
property by brute force.

Families:

``uniformity``
    One heavy point of mass ``eps' + 1/n`` followed by ``eps' n`` zeros, the rest
    at ``1/n``, cyclically shifted by ``r``. Exactly ``eps'``-far from uniform,
    and its CDF agrees with ``j/n`` outside the shifted chunk.
``tolerant``
    ``2K`` equal buckets paired as ``(A_k, B_k)``; a coin per pair moves ``alpha/n``
    per point from ``B_k`` to ``A_k``.
``entropy``
    A heavy first point of mass ``1 - 1/log2 n`` plus a random set spread
    uniformly over ``log2 n`` (sparse) or ``n^(1/4) log2 n`` (wide) points; the two
    entropies differ by exactly 1/4 bit.
``support``
    Mirror pairs ``(i, n + 1 - i)`` whose masses are ``(1 +- X_i)/n``; each head
    empties one element.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np

from dualtest.distributions import (
    ExplicitDistribution,
    entropy_exact,
    save_distribution,
    support_size_exact,
    tv_distance,
    uniform,
)

__all__ = [
    "Certificate",
    "HardInstance",
    "gen_uniformity_lb",
    "gen_tolerant_lb",
    "gen_entropy_lb",
    "gen_support_lb",
    "tolerant_presets",
    "distance_to_sorted",
    "generate",
    "FAMILIES",
]

Forced = Literal["heads", "tails"] | None


@dataclass(frozen=True)
class Certificate:
    """Exact property value; ``kind`` is one of
    ``exact_tv_to_uniform``, ``exact_entropy``, ``exact_support``, ``exact_tv_formula``."""

    kind: str
    value: float
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "value": self.value, **self.details}


@dataclass(frozen=True)
class HardInstance:
    distribution: ExplicitDistribution
    certificate: Certificate
    family: str
    params: dict[str, Any]
    seed: int | None = None

    def brute_force_value(self) -> float:
        d = self.distribution
        kind = self.certificate.kind
        if kind in ("exact_tv_to_uniform", "exact_tv_formula"):
            return tv_distance(d, uniform(d.n))
        if kind == "exact_entropy":
            return entropy_exact(d)
        if kind == "exact_support":
            return float(support_size_exact(d, 1.0 / d.n))
        raise ValueError(f"unknown certificate kind {kind!r}")

    def verify(self) -> float:
        """Absolute gap between the certificate and the brute-force oracle."""
        return abs(self.brute_force_value() - self.certificate.value)

    def provenance(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "params": self.params,
            "seed": self.seed,
            "certificate": self.certificate.to_json(),
        }

    def save(self, path: str | Path) -> Path:
        """Write the distribution to ``path`` and the provenance to ``<path>.meta.json``."""
        path = Path(path)
        save_distribution(self.distribution, path)
        sidecar = path.with_name(path.name + ".meta.json")
        sidecar.write_text(json.dumps(self.provenance(), indent=2))
        return sidecar


def _coins(k: int, p: float, rng: np.random.Generator, forced: Forced) -> np.ndarray:
    if forced == "heads":
        return np.ones(k, dtype=bool)
    if forced == "tails":
        return np.zeros(k, dtype=bool)
    if forced is not None:
        raise ValueError(f"forced must be 'heads', 'tails' or None, not {forced!r}")
    return rng.random(k) < p


def gen_uniformity_lb(n: int, epsilon: float, r: int = 0) -> HardInstance:
    """Shifted-chunk instance, exactly ``round(epsilon n)/n``-far from uniform."""
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon={epsilon} outside (0, 1/2]")
    if n * epsilon < 1.0:
        raise ValueError(f"need n >= 1/epsilon, got n={n}, epsilon={epsilon}")
    block = max(1, int(round(epsilon * n)))
    rest = n - block - 1
    if not 0 <= r < rest:
        raise ValueError(f"offset r={r} outside [0, {rest})")
    eps_prime = block / n
    pmf = np.full(n, 1.0 / n)
    pmf[0] = eps_prime + 1.0 / n
    pmf[1 : block + 1] = 0.0
    pmf = np.roll(pmf, r)
    return HardInstance(
        ExplicitDistribution(pmf),
        Certificate("exact_tv_to_uniform", eps_prime, {"block": block, "chunk": [r + 1, r + block + 1]}),
        "uniformity",
        {"n": n, "epsilon": epsilon, "r": r},
    )


def tolerant_presets(epsilon: float) -> dict[str, float]:
    """The two coin biases, ``p+ = (1 + eps)/2`` and ``p- = (1 + 20 eps)/2``."""
    return {"p_plus": (1.0 + epsilon) / 2.0, "p_minus": (1.0 + 20.0 * epsilon) / 2.0}


def gen_tolerant_lb(
    n: int,
    K: int,
    alpha: float = 1.0,
    p: float = 0.5,
    seed: int | None = None,
    *,
    forced: Forced = None,
    shuffle: bool = True,
) -> HardInstance:
    """Paired-bucket instance; distance to uniform is ``alpha * heads / (2K)``.

    With ``shuffle=False`` the ``A_k`` are consecutive blocks covering the first
    half of ``[n]`` and ``B_k`` mirror them in the second half.
    """
    if K < 1 or n % (2 * K):
        raise ValueError(f"n={n} must be divisible by 2K={2 * K}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1]; larger values give negative masses")
    if forced is None and not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1); use forced='heads'/'tails' for degenerate coins")
    rng = np.random.default_rng(seed)
    size = n // (2 * K)
    order = rng.permutation(n) if shuffle else np.arange(n)
    buckets = order.reshape(2 * K, size)
    heads = _coins(K, p, rng, forced)

    pmf = np.full(n, 1.0 / n)
    for k in np.flatnonzero(heads):
        pmf[buckets[k]] = (1.0 + alpha) / n
        pmf[buckets[K + k]] = (1.0 - alpha) / n
    h = int(heads.sum())
    return HardInstance(
        ExplicitDistribution(pmf),
        Certificate("exact_tv_formula", alpha * h / (2.0 * K), {"alpha": alpha, "heads": h, "K": K}),
        "tolerant",
        {"n": n, "K": K, "alpha": alpha, "p": p, "forced": forced, "shuffle": shuffle},
        seed,
    )


def _entropy_family_sizes(n: int) -> tuple[int, int]:
    log_n = n.bit_length() - 1
    if n < 16 or n != 1 << log_n or log_n % 4:
        raise ValueError(f"n={n} must be a power of two with an integer fourth root (16, 256, 4096, 65536, ...)")
    return log_n, 1 << (log_n // 4)


def gen_entropy_lb(n: int, family: Literal["sparse", "wide"], seed: int | None = None) -> HardInstance:
    """Heavy first element plus a random subset of ``{2..n}`` carrying ``1/log2 n`` uniformly."""
    log_n, k_n = _entropy_family_sizes(n)
    if family == "sparse":
        s_size = log_n
    elif family == "wide":
        s_size = k_n * log_n
    else:
        raise ValueError(f"family must be 'sparse' or 'wide', not {family!r}")
    gamma = 1.0 / log_n
    rng = np.random.default_rng(seed)
    chosen = rng.choice(np.arange(2, n + 1), size=s_size, replace=False)
    pmf = np.zeros(n)
    pmf[0] = 1.0 - gamma
    pmf[chosen - 1] = gamma / s_size
    entropy = -(1.0 - gamma) * math.log2(1.0 - gamma) + gamma * math.log2(s_size / gamma)
    return HardInstance(
        ExplicitDistribution(pmf),
        Certificate("exact_entropy", entropy, {"set_size": s_size, "gamma": gamma}),
        "entropy",
        {"n": n, "family": family},
        seed,
    )


def gen_support_lb(n: int, p: float, seed: int | None = None, *, forced: Forced = None) -> HardInstance:
    """Mirror-pair instance; support size is ``n - heads``."""
    if n < 2 or n % 2:
        raise ValueError(f"n={n} must be even")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    heads = _coins(n // 2, p, rng, forced)
    x = heads.astype(np.float64)
    pmf = np.empty(n)
    pmf[: n // 2] = (1.0 + x) / n
    # element n + 1 - i sits at 0-based position n - i
    pmf[n // 2 :] = ((1.0 - x) / n)[::-1]
    h = int(heads.sum())
    return HardInstance(
        ExplicitDistribution(pmf),
        Certificate("exact_support", float(n - h), {"heads": h}),
        "support",
        {"n": n, "p": p, "forced": forced},
        seed,
    )


def distance_to_sorted(d: ExplicitDistribution) -> float:
    """TV distance from ``d`` to its pmf sorted nonincreasingly (an upper bound on distance to monotone)."""
    return tv_distance(d, ExplicitDistribution(np.sort(d.pmf)[::-1]))


FAMILIES = ("uniformity", "tolerant", "entropy", "support")


def generate(family: str, params: dict[str, Any], seed: int | None = None) -> HardInstance:
    """Dispatch by family name; used by the CLI."""
    params = dict(params)
    if family == "uniformity":
        return gen_uniformity_lb(int(params["n"]), float(params["epsilon"]), int(params.get("r", 0)))
    if family == "tolerant":
        return gen_tolerant_lb(
            int(params["n"]),
            int(params["K"]),
            float(params.get("alpha", 1.0)),
            float(params.get("p", 0.5)),
            seed,
            forced=params.get("forced"),
            shuffle=bool(params.get("shuffle", True)),
        )
    if family == "entropy":
        return gen_entropy_lb(int(params["n"]), params.get("family", "sparse"), seed)
    if family == "support":
        return gen_support_lb(int(params["n"]), float(params.get("p", 0.5)), seed, forced=params.get("forced"))
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
