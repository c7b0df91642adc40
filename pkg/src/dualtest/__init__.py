"""Property testers and estimators for distributions under dual access.

Dual access means sampling (SAMP) plus exact point evaluation (EVAL) or
cumulative evaluation (CEVAL). Every oracle counts its queries exactly.
"""

from dualtest.distributions import (
    ExplicitDistribution,
    entropy_exact,
    load_distribution,
    save_distribution,
    support_size_exact,
    tv_distance,
)
from dualtest.oracles import CumulativeDualOracle, DualOracle, NoiseModel, QueryStats

__all__ = [
    "ExplicitDistribution",
    "entropy_exact",
    "load_distribution",
    "save_distribution",
    "support_size_exact",
    "tv_distance",
    "CumulativeDualOracle",
    "DualOracle",
    "NoiseModel",
    "QueryStats",
]

__version__ = "0.1.0"
