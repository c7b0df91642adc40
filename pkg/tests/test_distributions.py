import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualtest import distributions as dd
from dualtest.distributions import ExplicitDistribution


def pmfs(min_n=1, max_n=40):
    weights = st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=min_n, max_size=max_n)
    return weights.filter(lambda w: sum(w) > 1e-3).map(lambda w: ExplicitDistribution(w, renormalize=True))


# frozen values, computed by hand


def test_tv_frozen():
    assert dd.tv_distance(ExplicitDistribution([0.5, 0.5]), ExplicitDistribution([1.0, 0.0])) == 0.5
    a = ExplicitDistribution([0.2, 0.3, 0.5])
    b = ExplicitDistribution([0.5, 0.3, 0.2])
    assert dd.tv_distance(a, b) == pytest.approx(0.3, abs=1e-15)


def test_entropy_frozen():
    assert dd.entropy_exact(ExplicitDistribution([0.5, 0.25, 0.25])) == 1.5
    assert dd.entropy_exact(dd.uniform(1024)) == pytest.approx(10.0, abs=1e-12)
    assert dd.entropy_exact(dd.point_mass(7, at=3)) == 0.0


def test_support_frozen():
    d = ExplicitDistribution([0.5, 0.25, 0.25, 0.0])
    assert dd.support_size_exact(d, 0.25) == 3
    assert dd.support_size_exact(d, 0.3) == 1
    with pytest.raises(ValueError):
        dd.support_size_exact(d, 0.0)


def test_binary_entropy_and_bound():
    assert dd.binary_entropy(0.5) == 1.0
    assert dd.binary_entropy(0.0) == 0.0
    assert dd.binary_entropy(1.0) == 0.0
    # alpha log2(n-1) + h(alpha) at alpha = 1/2, n = 5: 0.5*2 + 1
    assert dd.entropy_diff_bound(0.5, 5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        dd.entropy_diff_bound(1.5, 5)


def test_prefix_cdf():
    cdf = ExplicitDistribution([0.25, 0.25, 0.5]).prefix_cdf()
    assert cdf.at(0) == 0.0
    assert cdf.at(2) == 0.5
    assert cdf.at(3) == 1.0


def test_constructors():
    assert dd.uniform(4).pmf.tolist() == [0.25] * 4
    assert dd.point_mass(3, at=2).pmf.tolist() == [0.0, 1.0, 0.0]
    assert dd.uniform_on_prefix(4, 2).pmf.tolist() == [0.5, 0.5, 0.0, 0.0]
    assert dd.is_monotone_nonincreasing(dd.random_monotone(50, np.random.default_rng(1)))
    assert not dd.is_monotone_nonincreasing(ExplicitDistribution([0.2, 0.8]))


@pytest.mark.parametrize(
    "pmf",
    [[0.5, 0.6], [-0.1, 1.1], [float("nan"), 1.0], [], [0.3, 0.3]],
)
def test_invalid_pmf(pmf):
    with pytest.raises(ValueError):
        ExplicitDistribution(pmf)


def test_pmf_is_read_only_and_one_based():
    d = ExplicitDistribution([0.1, 0.9])
    assert d.pmf_at(2) == 0.9
    with pytest.raises((ValueError, RuntimeError)):
        d.pmf[0] = 0.5
    with pytest.raises(IndexError):
        d.pmf_at(0)


def test_tv_mismatched_domains():
    with pytest.raises(ValueError):
        dd.tv_distance(dd.uniform(3), dd.uniform(4))


def test_malformed_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ValueError):
        dd.load_distribution(p)
    p.write_text(json.dumps({"n": 3, "pmf": [0.5, 0.5]}))
    with pytest.raises(ValueError):
        dd.load_distribution(p)


@pytest.mark.parametrize("suffix", [".json", ".bin"])
def test_file_round_trip(tmp_path, suffix):
    d = dd.random_distribution(37, np.random.default_rng(3))
    path = tmp_path / f"d{suffix}"
    dd.save_distribution(d, path)
    assert dd.load_distribution(path) == d


def test_binary_layout():
    raw = ExplicitDistribution([0.25, 0.75]).to_bytes()
    assert raw[:8] == (2).to_bytes(8, "little")
    assert np.frombuffer(raw[8:], dtype="<f8").tolist() == [0.25, 0.75]


# properties


@given(pmfs(), pmfs())
def test_tv_is_a_metric_on_shared_domain(a, b):
    if a.n != b.n:
        return
    t = dd.tv_distance(a, b)
    assert 0.0 <= t <= 1.0 + 1e-12
    assert t == pytest.approx(dd.tv_distance(b, a), abs=1e-15)
    assert dd.tv_distance(a, a) == 0.0


@given(pmfs(min_n=3, max_n=3), pmfs(min_n=3, max_n=3), pmfs(min_n=3, max_n=3))
def test_tv_triangle(a, b, c):
    assert dd.tv_distance(a, c) <= dd.tv_distance(a, b) + dd.tv_distance(b, c) + 1e-12


@given(pmfs())
def test_tv_equals_max_event_gap(a):
    # tv(a, U) = sum over points where a exceeds U of the gap
    u = dd.uniform(a.n)
    gap = a.pmf - u.pmf
    assert dd.tv_distance(a, u) == pytest.approx(math.fsum(gap[gap > 0]), abs=1e-12)


@given(pmfs())
def test_entropy_range(d):
    h = dd.entropy_exact(d)
    assert -1e-12 <= h <= math.log2(d.n) + 1e-9


@given(pmfs())
@settings(max_examples=50)
def test_json_round_trip(d):
    assert ExplicitDistribution.from_json(json.loads(json.dumps(d.to_json()))) == d
    assert ExplicitDistribution.from_bytes(d.to_bytes()) == d


@given(pmfs(min_n=2))
def test_entropy_continuity(d):
    # |H(D) - H(U)| <= bound(tv) whenever tv <= 1 - 1/n
    u = dd.uniform(d.n)
    t = dd.tv_distance(d, u)
    if t > 1 - 1 / d.n or t == 0:
        return
    assert abs(dd.entropy_exact(d) - dd.entropy_exact(u)) <= dd.entropy_diff_bound(t, d.n) + 1e-9


def test_small_examples():
    assert dd.entropy_exact(dd.uniform(8)) == 3.0
    assert dd.support_size_exact(dd.uniform(40), 1 / 40) == 40
    assert dd.support_size_exact(dd.point_mass(40), 1 / 40) == 1
    assert dd.support_size_exact(dd.uniform_on_prefix(40, 20), 1 / 40) == 20
    assert dd.is_monotone_nonincreasing(ExplicitDistribution([0.5, 0.3, 0.2]))
    assert dd.is_monotone_nonincreasing(dd.uniform(9))
    assert dd.entropy_diff_bound(0.0, 10) == 0.0
    assert dd.entropy_diff_bound(0.5, 17) == pytest.approx(3.0)


def test_tv_equals_exhaustive_event_maximum():
    from itertools import product

    rng = np.random.default_rng(6)
    a, b = dd.random_distribution(6, rng), dd.random_distribution(6, rng)
    best = max(
        float(np.dot(mask, a.pmf - b.pmf)) for mask in (np.array(bits) for bits in product([0, 1], repeat=6))
    )
    assert dd.tv_distance(a, b) == pytest.approx(best, abs=1e-12)


def test_prefix_cdf_differences_recover_pmf():
    d = dd.random_distribution(500, np.random.default_rng(2))
    cdf = np.concatenate([[0.0], d.prefix_cdf().cdf])
    assert np.all(np.diff(cdf) >= 0)
    assert np.max(np.abs(np.diff(cdf) - d.pmf)) <= 1e-12


def test_entropy_continuity_random_pairs():
    rng = np.random.default_rng(64)
    for _ in range(1000):
        a, b = dd.random_distribution(64, rng), dd.random_distribution(64, rng)
        t = dd.tv_distance(a, b)
        assert abs(dd.entropy_exact(a) - dd.entropy_exact(b)) <= dd.entropy_diff_bound(t, 64) + 1e-9


def test_tv_exhaustive_at_twelve():
    rng = np.random.default_rng(12)
    a, b = dd.random_distribution(12, rng), dd.random_distribution(12, rng)
    masks = (np.arange(2**12)[:, None] >> np.arange(12)) & 1
    assert dd.tv_distance(a, b) == pytest.approx(float((masks @ (a.pmf - b.pmf)).max()), abs=1e-12)


@given(pmfs(min_n=2, max_n=30))
def test_entropy_maximal_only_for_uniform(d):
    gap = math.log2(d.n) - dd.entropy_exact(d)
    t = dd.tv_distance(d, dd.uniform(d.n))
    # the maximum is attained at the uniform distribution and nowhere else
    assert dd.entropy_exact(dd.uniform(d.n)) == pytest.approx(math.log2(d.n), abs=1e-12)
    if t > 1e-3:
        assert gap > 1e-9
