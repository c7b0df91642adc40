"""Seeded Monte-Carlo experiment runner for the testers and estimators.

Each trial gets a fresh oracle seeded with ``derive_seed(master_seed, index)``,
where ``derive_seed`` is SplitMix64 applied to
``master_seed + (index + 1) * 0x9E3779B97F4A7C15 (mod 2^64)``. A report is a
list of :class:`TrialRecord` plus an aggregate; with timing disabled (the
default) the same config always produces byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from dualtest import distributions as dists
from dualtest.distributions import ExplicitDistribution, entropy_exact, support_size_exact, tv_distance
from dualtest.entropy import estimate_entropy, estimate_entropy_monotone, estimate_entropy_robust
from dualtest.equivalence import test_closeness, test_identity_known, test_uniformity
from dualtest.hard_instances import FAMILIES, generate
from dualtest.oracles import CumulativeDualOracle, DualOracle, NoiseModel
from dualtest.support import estimate_support
from dualtest.tolerant import tolerant_test_identity, tolerant_test_uniformity

__all__ = [
    "derive_seed",
    "ExperimentConfig",
    "TrialRecord",
    "Report",
    "ALGORITHMS",
    "resolve_distribution",
    "run_trial",
    "run_experiment",
    "sweep",
    "read_report",
]

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(master_seed: int, index: int) -> int:
    """SplitMix64 mix of ``master_seed + (index + 1) * GOLDEN``."""
    z = (master_seed + (index + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    trials: int = 100
    master_seed: int = 0
    dist_path: str | None = None
    family: str | None = None
    family_params: dict[str, Any] = field(default_factory=dict)
    ref_path: str | None = None
    n: int | None = None
    epsilon: float | None = None
    eps1: float | None = None
    eps2: float | None = None
    delta: float | None = None
    noise_tau: float | None = None
    noise_mode: str = "random"
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials: must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm: unknown {self.algorithm!r}; expected one of {sorted(ALGORITHMS)}")
        for name in ALGORITHMS[self.algorithm].required:
            if getattr(self, name) is None:
                raise ValueError(f"{name}: required by {self.algorithm}")
        if self.noise_mode not in ("random", "up", "down"):
            raise ValueError(f"noise_mode: unknown {self.noise_mode!r}")


@dataclass
class TrialRecord:
    trial: int
    seed: int
    output: str | float | int
    truth: float | None
    success: bool
    samp: int
    eval: int
    ceval: int
    wall_time: float | None = None


@dataclass
class Report:
    config: dict[str, Any]
    records: list[TrialRecord]
    aggregate: dict[str, Any]

    def to_jsonl(self) -> str:
        lines = [json.dumps(asdict(r), sort_keys=True) for r in self.records]
        lines.append(json.dumps({"aggregate": self.aggregate, "config": self.config}, sort_keys=True))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(TrialRecord.__dataclass_fields__)
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for r in self.records:
            writer.writerow(asdict(r))
        return buf.getvalue()

    def write(self, path: str | Path, fmt: str = "json") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_jsonl()
        Path(path).write_text(text)


# -- algorithm table ---------------------------------------------------------------


@dataclass(frozen=True)
class _Algorithm:
    required: tuple[str, ...]
    truth: Callable[[ExplicitDistribution, ExplicitDistribution | None], float]
    run: Callable[..., tuple[Any, Any]]
    success: Callable[[Any, float, ExperimentConfig, int], bool]
    cumulative: bool = False


def _tv_to_ref(d: ExplicitDistribution, ref: ExplicitDistribution | None) -> float:
    return tv_distance(d, ref if ref is not None else dists.uniform(d.n))


def _equivalence_success(decision: str, truth: float, cfg: ExperimentConfig, n: int) -> bool:
    if truth <= 1e-12:
        return decision == "ACCEPT"
    if truth >= cfg.epsilon:
        return decision == "REJECT"
    return True


def _tolerant_success(decision: str, truth: float, cfg: ExperimentConfig, n: int) -> bool:
    if truth <= cfg.eps1:
        return decision == "ACCEPT"
    if truth >= cfg.eps2:
        return decision == "REJECT"
    return True


def _run_uniformity(oracle, ref, cfg, seed):
    v = test_uniformity(oracle, cfg.epsilon)
    return v.decision.value, v.stats


def _run_identity(oracle, ref, cfg, seed):
    v = test_identity_known(oracle, ref if ref is not None else dists.uniform(oracle.n), cfg.epsilon)
    return v.decision.value, v.stats


def _run_closeness(oracle, ref, cfg, seed):
    other = DualOracle(ref if ref is not None else dists.uniform(oracle.n), seed=derive_seed(seed, 1))
    v = test_closeness(oracle, other, cfg.epsilon)
    return v.decision.value, v.stats


def _run_tolerant(oracle, ref, cfg, seed):
    if ref is None:
        v = tolerant_test_uniformity(oracle, cfg.eps1, cfg.eps2)
    else:
        v = tolerant_test_identity(oracle, ref, cfg.eps1, cfg.eps2)
    return v.decision.value, v.stats


def _run_entropy(oracle, ref, cfg, seed):
    est = estimate_entropy_robust(oracle, cfg.delta) if oracle.noise is not None else estimate_entropy(oracle, cfg.delta)
    return est.value, est.stats


def _run_entropy_monotone(oracle, ref, cfg, seed):
    est = estimate_entropy_monotone(oracle, cfg.delta)
    return est.value, est.stats


def _run_support(oracle, ref, cfg, seed):
    est = estimate_support(oracle, cfg.epsilon)
    return est.k_hat, est.stats


ALGORITHMS: dict[str, _Algorithm] = {
    "test-uniformity": _Algorithm(("epsilon",), lambda d, r: _tv_to_ref(d, None), _run_uniformity, _equivalence_success),
    "test-identity": _Algorithm(("epsilon",), _tv_to_ref, _run_identity, _equivalence_success),
    "test-closeness": _Algorithm(("epsilon",), _tv_to_ref, _run_closeness, _equivalence_success),
    "tolerant-l1": _Algorithm(("eps1", "eps2"), _tv_to_ref, _run_tolerant, _tolerant_success),
    "estimate-entropy": _Algorithm(
        ("delta",),
        lambda d, r: entropy_exact(d),
        _run_entropy,
        lambda out, h, cfg, n: h - cfg.delta <= out <= h + cfg.delta / 2.0,
    ),
    "estimate-entropy-monotone": _Algorithm(
        ("delta",),
        lambda d, r: entropy_exact(d),
        _run_entropy_monotone,
        lambda out, h, cfg, n: abs(out - h) <= cfg.delta,
        cumulative=True,
    ),
    "estimate-support": _Algorithm(
        ("epsilon",),
        lambda d, r: float(support_size_exact(d, 1.0 / d.n)),
        _run_support,
        lambda out, k, cfg, n: abs(out - k) <= cfg.epsilon * n,
    ),
}


# -- distribution sources ----------------------------------------------------------

_BUILTIN = ("uniform", "point-mass", "uniform-prefix", "random", "random-monotone")


def resolve_distribution(cfg: ExperimentConfig) -> ExplicitDistribution:
    """The fixture named by ``cfg``: a file, a builtin, or a hard-instance family.

    Random fixtures are drawn once per experiment from ``master_seed``.
    """
    if cfg.dist_path is not None:
        return dists.load_distribution(cfg.dist_path)
    family = cfg.family or "uniform"
    params = dict(cfg.family_params)
    if cfg.n is not None:
        params.setdefault("n", cfg.n)
    if family in FAMILIES:
        if family == "uniformity" and cfg.epsilon is not None:
            params.setdefault("epsilon", cfg.epsilon)
        return generate(family, params, seed=cfg.master_seed).distribution
    if family not in _BUILTIN:
        raise ValueError(f"family: unknown {family!r}; expected one of {_BUILTIN + FAMILIES}")
    if "n" not in params:
        raise ValueError(f"n: required by family {family!r}")
    n = int(params["n"])
    rng = np.random.default_rng(cfg.master_seed)
    if family == "uniform":
        return dists.uniform(n)
    if family == "point-mass":
        return dists.point_mass(n, int(params.get("at", 1)))
    if family == "uniform-prefix":
        return dists.uniform_on_prefix(n, int(params["k"]))
    if family == "random":
        return dists.random_distribution(n, rng)
    return dists.random_monotone(n, rng)


def _noise(cfg: ExperimentConfig) -> NoiseModel | None:
    if cfg.noise_tau is None:
        return None
    if cfg.noise_mode == "random":
        return NoiseModel(cfg.noise_tau)
    return NoiseModel.constant(cfg.noise_tau, cfg.noise_mode)


def run_trial(
    cfg: ExperimentConfig,
    index: int,
    dist: ExplicitDistribution,
    ref: ExplicitDistribution | None,
    truth: float,
) -> TrialRecord:
    algo = ALGORITHMS[cfg.algorithm]
    seed = derive_seed(cfg.master_seed, index)
    start = time.perf_counter()
    if algo.cumulative:
        oracle = CumulativeDualOracle(dist, seed=seed)
    else:
        oracle = DualOracle(dist, seed=seed, noise=_noise(cfg))
    output, stats = algo.run(oracle, ref, cfg, seed)
    elapsed = time.perf_counter() - start
    return TrialRecord(
        trial=index,
        seed=seed,
        output=output,
        truth=truth,
        success=bool(algo.success(output, truth, cfg, dist.n)),
        samp=stats.samp_count,
        eval=stats.eval_count,
        ceval=stats.ceval_count,
        wall_time=elapsed if cfg.timing else None,
    )


def _run_chunk(args):
    cfg, indices, dist, ref, truth = args
    return [run_trial(cfg, i, dist, ref, truth) for i in indices]


def aggregate(records: list[TrialRecord], runtime: float | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "trials": len(records),
        "success_rate": sum(r.success for r in records) / len(records),
    }
    for key in ("samp", "eval", "ceval"):
        vals = [getattr(r, key) for r in records]
        out[f"mean_{key}"] = sum(vals) / len(vals)
        out[f"max_{key}"] = max(vals)
    totals = [r.samp + r.eval + r.ceval for r in records]
    out["mean_queries"] = sum(totals) / len(totals)
    out["max_queries"] = max(totals)
    numeric = [r.output for r in records if isinstance(r.output, (int, float)) and not isinstance(r.output, bool)]
    if numeric:
        out["mean_output"] = math.fsum(numeric) / len(numeric)
    else:
        out["accept_rate"] = sum(r.output == "ACCEPT" for r in records) / len(records)
    if runtime is not None:
        out["runtime"] = runtime
    return out


def run_experiment(cfg: ExperimentConfig) -> Report:
    start = time.perf_counter()
    dist = resolve_distribution(cfg)
    ref = dists.load_distribution(cfg.ref_path) if cfg.ref_path else None
    if ref is not None and ref.n != dist.n:
        raise ValueError(f"ref_path: domain size {ref.n} differs from the distribution's {dist.n}")
    truth = ALGORITHMS[cfg.algorithm].truth(dist, ref)
    indices = list(range(cfg.trials))
    if cfg.workers > 1:
        chunks = [indices[w :: cfg.workers] for w in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = pool.map(_run_chunk, [(cfg, c, dist, ref, truth) for c in chunks if c])
            records = sorted((r for part in parts for r in part), key=lambda r: r.trial)
    else:
        records = _run_chunk((cfg, indices, dist, ref, truth))
    runtime = time.perf_counter() - start if cfg.timing else None
    return Report(_config_dict(cfg), records, aggregate(records, runtime))


def _config_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d.pop("workers")
    return d


SWEEP_AXES = {"epsilon": "epsilon", "eps": "epsilon", "delta": "delta", "n": "n", "gap": "eps2"}


def sweep(cfg: ExperimentConfig, axis: str, values: list[float]) -> list[dict[str, Any]]:
    """One aggregate row per value of ``axis``.

    ``axis="gap"`` moves ``eps2`` so that ``eps2 - eps1`` takes the given values.
    """
    if not values:
        raise ValueError("values: sweep needs at least one value")
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis: unknown {axis!r}; expected one of {sorted(SWEEP_AXES)}")
    rows = []
    for v in values:
        if axis == "n":
            point = replace(cfg, n=int(v))
        elif axis == "gap":
            point = replace(cfg, eps2=cfg.eps1 + v)
        else:
            point = replace(cfg, **{SWEEP_AXES[axis]: float(v)})
        rows.append({"axis": axis, "value": v, **run_experiment(point).aggregate})
    return rows


def read_report(path: str | Path) -> tuple[list[TrialRecord], dict[str, Any] | None]:
    """Parse a JSON-lines or CSV report back into records (and the stored aggregate, JSON only)."""
    text = Path(path).read_text()
    if text.startswith("trial,"):
        records = []
        for row in csv.DictReader(io.StringIO(text)):
            output: Any = row["output"]
            if output not in ("ACCEPT", "REJECT"):
                output = float(output)
            records.append(
                TrialRecord(
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    output=output,
                    truth=float(row["truth"]) if row["truth"] else None,
                    success=row["success"] == "True",
                    samp=int(row["samp"]),
                    eval=int(row["eval"]),
                    ceval=int(row["ceval"]),
                    wall_time=float(row["wall_time"]) if row["wall_time"] else None,
                )
            )
        return records, None
    records, agg = [], None
    for line in text.splitlines():
        obj = json.loads(line)
        if "aggregate" in obj:
            agg = obj["aggregate"]
        else:
            records.append(TrialRecord(**obj))
    return records, agg
