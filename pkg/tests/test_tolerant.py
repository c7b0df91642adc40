import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualtest import distributions as dd
from dualtest import tolerant as tol
from dualtest.hard_instances import gen_tolerant_lb
from dualtest.oracles import DualOracle, NoiseModel


def test_frozen_parameters():
    assert tol.samples_for_accuracy(0.1) == 90
    assert tol.samples_for_accuracy(0.05) == 359
    p = tol.tolerance_params(0.1, 0.3)
    assert p.gamma == pytest.approx(0.1) and p.m == 90 and p.threshold == pytest.approx(0.2)
    assert tol.robust_noise_budget(0.1, 0.3) == pytest.approx(0.05)
    assert tol.robust_noise_budget(0.1, 0.3, unknown_pair=True) == pytest.approx(0.025)


@pytest.mark.parametrize("eps1,eps2", [(0.3, 0.1), (0.2, 0.2), (-0.1, 0.2), (0.1, 1.2)])
def test_invalid_tolerances(eps1, eps2):
    with pytest.raises(ValueError):
        tol.tolerance_params(eps1, eps2)


def test_single_term_frozen():
    # a point mass is always sampled at its atom, so every term is the same
    o = DualOracle(dd.point_mass(4, at=2), seed=0)
    # one term: 1 - (1/4) / 1
    assert tol.estimate_l1_to_uniform(o, 5) == pytest.approx(0.75)
    assert tol.estimate_l1_to_known(DualOracle(dd.point_mass(4, at=2)), dd.uniform_on_prefix(4, 2), 3) == pytest.approx(0.5)


def test_uniform_is_exactly_zero_and_accepted():
    o = DualOracle(dd.uniform(10_000), seed=0)
    v = tol.tolerant_test_uniformity(o, 0.1, 0.3)
    assert v.accepted and v.statistic == 0.0
    assert (v.stats.samp_count, v.stats.eval_count) == (90, 90)


def test_to_uniform_matches_to_known_bitwise():
    d = dd.random_distribution(64, np.random.default_rng(0))
    a = tol.estimate_l1_to_uniform(DualOracle(d, seed=4), 200)
    b = tol.estimate_l1_to_known(DualOracle(d, seed=4), dd.uniform(64), 200)
    assert a == b


def _mean_estimate(fn, trials=300):
    return float(np.mean([fn(s) for s in range(trials)]))


def test_estimators_are_unbiased():
    rng = np.random.default_rng(7)
    d = dd.random_distribution(50, rng)
    e = dd.random_distribution(50, rng)
    t_known = dd.tv_distance(d, e)
    t_unif = dd.tv_distance(d, dd.uniform(50))
    m = 200
    # standard error of a mean of 300*200 terms in [0,1] is below 0.003
    assert _mean_estimate(lambda s: tol.estimate_l1_to_known(DualOracle(d, seed=s), e, m)) == pytest.approx(t_known, abs=0.015)
    pair = _mean_estimate(lambda s: tol.estimate_l1_unknown_pair(DualOracle(d, seed=s), DualOracle(e, seed=s + 1), m))
    assert pair == pytest.approx(t_known, abs=0.015)
    assert _mean_estimate(lambda s: tol.estimate_l1_eval_only(DualOracle(d, seed=s), m)) == pytest.approx(t_unif, abs=0.015)


def test_eval_only_uses_no_samples():
    o = DualOracle(dd.uniform(10), seed=0)
    assert tol.estimate_l1_eval_only(o, 40) == 0.0
    assert (o.stats.samp_count, o.stats.eval_count) == (0, 40)


def test_closeness_counts_both_oracles():
    v = tol.tolerant_test_closeness(DualOracle(dd.uniform(20), seed=0), DualOracle(dd.uniform(20), seed=1), 0.1, 0.3)
    assert v.accepted
    assert (v.stats.samp_count, v.stats.eval_count) == (90, 180)


def test_rejects_far_instance():
    d = gen_tolerant_lb(10_000, 50, alpha=1.0, forced="heads").distribution
    assert dd.tv_distance(d, dd.uniform(10_000)) == pytest.approx(0.5)
    rejects = sum(not tol.tolerant_test_uniformity(DualOracle(d, seed=s), 0.1, 0.3).accepted for s in range(200))
    assert rejects / 200 >= 2 / 3


def test_inclusive_threshold():
    # statistic exactly at the midpoint accepts
    assert tol._verdict(0.2, 0.2, None).accepted


def test_robust_rejects_excess_noise():
    o = DualOracle(dd.uniform(100), noise=NoiseModel(0.06))
    with pytest.raises(tol.NoiseBudgetExceeded):
        tol.tolerant_test_robust(o, dd.uniform(100), 0.1, 0.3)
    o2 = DualOracle(dd.uniform(100), noise=NoiseModel(0.03))
    with pytest.raises(tol.NoiseBudgetExceeded):
        tol.tolerant_test_robust(o2, DualOracle(dd.uniform(100)), 0.1, 0.3)


@pytest.mark.parametrize("direction", ["up", "down"])
def test_robust_under_adversarial_noise(direction):
    n = 1000
    near = dd.uniform(n)
    far = gen_tolerant_lb(n, 10, alpha=1.0, forced="heads").distribution
    noise = NoiseModel.constant(0.05, direction)
    acc = sum(tol.tolerant_test_robust(DualOracle(near, seed=s, noise=noise), dd.uniform(n), 0.1, 0.3).accepted for s in range(400))
    rej = sum(not tol.tolerant_test_robust(DualOracle(far, seed=s, noise=noise), dd.uniform(n), 0.1, 0.3).accepted for s in range(400))
    assert acc >= 267 and rej >= 267


def test_robust_pair_query_size():
    v = tol.tolerant_test_robust(DualOracle(dd.uniform(50), seed=0), DualOracle(dd.uniform(50), seed=1), 0.1, 0.3)
    assert (v.stats.samp_count, v.stats.eval_count) == (90, 180)


def test_robust_without_noise_matches_plain_tester():
    d = gen_tolerant_lb(1000, 10, alpha=0.4, seed=2).distribution
    for s in range(30):
        a = tol.tolerant_test_robust(DualOracle(d, seed=s), dd.uniform(1000), 0.1, 0.3)
        b = tol.tolerant_test_uniformity(DualOracle(d, seed=s), 0.1, 0.3)
        assert a == b


@given(st.integers(2, 60), st.integers(0, 2**32 - 1), st.integers(1, 50))
@settings(max_examples=40)
def test_estimates_lie_in_unit_interval(n, seed, m):
    rng = np.random.default_rng(seed)
    d, e = dd.random_distribution(n, rng), dd.random_distribution(n, rng)
    for est in (
        tol.estimate_l1_to_known(DualOracle(d, seed=seed), e, m),
        tol.estimate_l1_unknown_pair(DualOracle(d, seed=seed), DualOracle(e, seed=seed), m),
        tol.estimate_l1_eval_only(DualOracle(d, seed=seed), m),
    ):
        assert 0.0 <= est <= 1.0


def test_m_must_be_positive():
    with pytest.raises(ValueError):
        tol.estimate_l1_to_uniform(DualOracle(dd.uniform(3)), 0)


def test_concentration_at_full_scale():
    from dualtest.hard_instances import gen_uniformity_lb

    far = gen_uniformity_lb(10_000, 0.3).distribution
    hits = sum(0.25 <= tol.estimate_l1_to_uniform(DualOracle(far, seed=s), 2000) <= 0.35 for s in range(400))
    assert hits >= 380
    pair = sum(
        abs(tol.estimate_l1_unknown_pair(DualOracle(dd.uniform(10_000), seed=s), DualOracle(far, seed=s + 1), 2000) - 0.3) <= 0.05
        for s in range(400)
    )
    assert pair >= 380
    rng = np.random.default_rng(100)
    d, e = dd.random_distribution(100, rng), dd.random_distribution(100, rng)
    t = dd.tv_distance(d, e)
    known = sum(abs(tol.estimate_l1_to_known(DualOracle(d, seed=s), e, 5000) - t) <= 0.05 for s in range(400))
    assert known >= 380


def test_point_mass_values():
    assert tol.estimate_l1_to_uniform(DualOracle(dd.point_mass(100), seed=0), 500) == pytest.approx(0.99)
    est = tol.estimate_l1_eval_only(DualOracle(dd.point_mass(100), seed=0), 5000)
    assert est == pytest.approx(0.99, abs=0.03)
    d = dd.random_distribution(100, np.random.default_rng(3))
    assert tol.estimate_l1_to_known(DualOracle(d, seed=1), d, 100) == 0.0
    assert tol.estimate_l1_unknown_pair(DualOracle(d, seed=1), DualOracle(d, seed=2), 100) == 0.0


def test_eval_only_agrees_with_sampling_estimator():
    d = dd.random_distribution(100, np.random.default_rng(8))
    a = tol.estimate_l1_eval_only(DualOracle(d, seed=0), 5000)
    b = tol.estimate_l1_to_uniform(DualOracle(d, seed=0), 5000)
    assert abs(a - b) <= 0.05


def test_expectation_identity():
    d = dd.random_distribution(50, np.random.default_rng(50))
    o = DualOracle(d, seed=0)
    s = o.samp_many(10**5)
    masses = o.eval_many(s)
    terms = np.where(masses > 1 / 50, 1 - (1 / 50) / masses, 0.0)
    assert terms.mean() == pytest.approx(dd.tv_distance(d, dd.uniform(50)), abs=0.01)


def test_unbiased_within_three_standard_errors():
    # per-term means over 10^6 draws for each estimator's X
    rng = np.random.default_rng(77)
    d, e = dd.random_distribution(80, rng), dd.random_distribution(80, rng)
    o = DualOracle(d, seed=0)
    s = o.samp_many(10**6)
    pd, pe = d.pmf[s - 1], e.pmf[s - 1]
    x = np.where(pd > pe, 1 - pe / pd, 0.0)
    assert abs(x.mean() - dd.tv_distance(d, e)) <= 3 * x.std() / 1000
    u = rng.integers(1, 81, size=10**6)
    y = np.maximum(0.0, 1 - 80 * d.pmf[u - 1])
    assert abs(y.mean() - dd.tv_distance(d, dd.uniform(80))) <= 3 * y.std() / 1000


@pytest.mark.parametrize("fixture", ["random", "prefix", "lb"])
def test_concentration_on_fixtures(fixture):
    n, gamma = 100, 0.1
    m = tol.samples_for_accuracy(gamma)
    d = {
        "random": dd.random_distribution(n, np.random.default_rng(1)),
        "prefix": dd.uniform_on_prefix(n, 30),
        "lb": gen_tolerant_lb(n, 10, alpha=0.6, seed=4).distribution,
    }[fixture]
    t = dd.tv_distance(d, dd.uniform(n))
    misses = sum(abs(tol.estimate_l1_to_uniform(DualOracle(d, seed=s), m) - t) > gamma for s in range(400))
    assert misses / 400 <= 1 / 3 + 0.07
