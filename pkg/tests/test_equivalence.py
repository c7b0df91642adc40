import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualtest import distributions as dd
from dualtest import equivalence as eq
from dualtest.hard_instances import gen_uniformity_lb
from dualtest.oracles import DualOracle


def test_sample_count_frozen():
    assert eq.sample_count(0.1) == 80
    assert eq.sample_count(0.4) == 20
    assert eq.sample_count(0.05) == 160
    with pytest.raises(ValueError):
        eq.sample_count(0.0)
    with pytest.raises(ValueError):
        eq.sample_count(1.5)


def test_query_budget_is_exact():
    v = eq.test_uniformity(DualOracle(dd.uniform(500), seed=0), 0.1)
    assert (v.stats.samp_count, v.stats.eval_count, v.stats.ceval_count) == (80, 160, 0)


@given(st.integers(1, 300), st.floats(0.01, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_perfect_completeness_uniform(n, eps, seed):
    v = eq.test_uniformity(DualOracle(dd.uniform(n), seed=seed), eps)
    assert v.decision is eq.Decision.ACCEPT and v.accepted and v.witness is None


@given(st.integers(2, 80), st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_perfect_completeness_identity_and_closeness(n, eps, seed):
    d = dd.random_distribution(n, np.random.default_rng(seed))
    assert eq.test_identity_known(DualOracle(d, seed=seed), d, eps).accepted
    assert eq.test_closeness(DualOracle(d, seed=seed), DualOracle(d, seed=seed + 1), eps).accepted


def test_rejects_far_instance():
    d = gen_uniformity_lb(1000, 0.1).distribution
    rejects = sum(not eq.test_uniformity(DualOracle(d, seed=s), 0.1).accepted for s in range(200))
    assert rejects / 200 >= 2 / 3


def test_witness_is_a_zero_mass_point():
    inst = gen_uniformity_lb(1000, 0.2, r=10)
    v = eq.test_uniformity(DualOracle(inst.distribution, seed=3), 0.2)
    assert v.decision is eq.Decision.REJECT
    assert inst.distribution.pmf_at(v.witness) == 0.0 or inst.distribution.pmf_at(v.witness) > 1 / 1000


def test_closeness_rejects_disjoint_and_counts_both_sides():
    a = dd.uniform_on_prefix(10, 5)
    b = dd.ExplicitDistribution([0.0] * 5 + [0.2] * 5)
    v = eq.test_closeness(DualOracle(a, seed=1), DualOracle(b, seed=2), 0.5)
    assert v.decision is eq.Decision.REJECT
    assert (v.stats.samp_count, v.stats.eval_count) == (32, 64)


def test_closeness_symmetry_in_distribution():
    a = dd.uniform(50)
    b = gen_uniformity_lb(50, 0.2).distribution
    ab = sum(eq.test_closeness(DualOracle(a, seed=s), DualOracle(b, seed=s + 10**6), 0.2).accepted for s in range(300))
    ba = sum(eq.test_closeness(DualOracle(b, seed=s), DualOracle(a, seed=s + 10**6), 0.2).accepted for s in range(300))
    assert abs(ab - ba) / 300 < 0.1


def test_domain_mismatch():
    with pytest.raises(ValueError):
        eq.test_identity_known(DualOracle(dd.uniform(5)), dd.uniform(6), 0.1)
    with pytest.raises(ValueError):
        eq.test_closeness(DualOracle(dd.uniform(5)), DualOracle(dd.uniform(6)), 0.1)


def test_explicit_rng_is_reproducible():
    d = gen_uniformity_lb(200, 0.1).distribution
    a = eq.test_identity_known(DualOracle(d, seed=1), dd.uniform(200), 0.1, rng=9)
    b = eq.test_identity_known(DualOracle(d, seed=1), dd.uniform(200), 0.1, rng=9)
    assert a == b


def test_reject_rates_at_scale():
    far = gen_uniformity_lb(10_000, 0.1).distribution
    assert sum(not eq.test_uniformity(DualOracle(far, seed=s), 0.1).accepted for s in range(400)) >= 264
    farther = gen_uniformity_lb(10_000, 0.2).distribution
    rej = sum(
        not eq.test_closeness(DualOracle(dd.uniform(10_000), seed=s), DualOracle(farther, seed=s + 1000), 0.2).accepted
        for s in range(400)
    )
    assert rej >= 264


def test_uniformity_wrapper_matches_identity():
    d = gen_uniformity_lb(300, 0.1).distribution
    a = eq.test_uniformity(DualOracle(d, seed=5), 0.1)
    b = eq.test_identity_known(DualOracle(d, seed=5), dd.uniform(300), 0.1)
    assert a == b
