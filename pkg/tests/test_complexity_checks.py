import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplinglab.approx_space import CoeffGrowth, DepthGrowth, GrowthPair, lipschitz_bound
from samplinglab.complexity_checks import (FunctionClassSample, ShatterInstance, constant_class,
                                           covering_bound, cube_intersection_volume,
                                           empirical_covering, empirical_lipschitz,
                                           khintchine_average, khintchine_enumerated,
                                           khintchine_lower_holds, random_budget_network,
                                           single_relu_class, subset_average,
                                           subset_average_enumerated, subset_bound, threshold_class,
                                           vc_bound, vc_bruteforce, vc_by_dichotomies)
from samplinglab.relu_net import Network, zero_network


def test_khintchine_examples():
    assert khintchine_average(1) == 1.0
    assert khintchine_average(2) == 1.0
    assert khintchine_average(4) == 1.5


@pytest.mark.parametrize("n", range(1, 15))
def test_khintchine_binomial_matches_enumeration(n):
    assert khintchine_average(n) == pytest.approx(khintchine_enumerated(n), abs=1e-14)


@pytest.mark.parametrize("n", range(1, 25))
def test_khintchine_two_sided(n):
    assert khintchine_lower_holds(n)
    assert khintchine_average(n) <= math.sqrt(n) + 1e-15


def test_subset_examples():
    assert subset_average(1, 1, {1}) == 0.5
    assert subset_average(3, 6, range(1, 7)) == pytest.approx(math.sqrt(6), abs=1e-15)
    assert subset_average(2, 2, {1, 2}) == pytest.approx((math.sqrt(2) + 4) / 6, abs=1e-15)
    assert subset_average(2, 2, {1, 2}) >= subset_bound(2)


@given(st.integers(1, 5), st.data())
def test_subset_hypergeometric_matches_enumeration(m, data):
    k = data.draw(st.integers(1, 2 * m))
    I = data.draw(st.sets(st.integers(1, 2 * m), min_size=m, max_size=2 * m))
    assert subset_average(m, k, I) == pytest.approx(subset_average_enumerated(m, k, I), abs=1e-13)
    assert subset_average(m, k, I) >= subset_bound(k)


def test_cube_examples():
    assert cube_intersection_volume(1, 1.0, [0.0]).exact == 1.0
    v = cube_intersection_volume(2, 0.5, [0.5, 0.5])
    assert v.exact == 1.0 and v.bound == 0.0625
    for d in (1, 2, 3):
        c = cube_intersection_volume(d, 0.5, np.zeros(d))
        assert c.exact == 0.5 ** d and c.exact >= c.bound


@settings(max_examples=100)
@given(st.integers(1, 4), st.floats(0.01, 1.0), st.integers(0, 2**31))
def test_cube_monte_carlo_agrees(d, T, seed):
    x = np.random.default_rng(seed).random(d)
    v = cube_intersection_volume(d, T, x, mc_samples=4000, seed=seed)
    assert v.exact >= v.bound
    assert abs(v.estimate - v.exact) <= 4 * v.sigma + 1e-3


def test_lipschitz_examples():
    const = Network.from_pairs([([[0.0]], [0.3])])
    assert empirical_lipschitz(const, 200) == (0.0, 0.0)
    chain = Network.from_pairs([([[1.0]], [0.0])] * 4)
    assert empirical_lipschitz(chain, 200).l1 <= 1 + 1e-9


@settings(max_examples=40)
@given(st.integers(1, 12), st.integers(1, 3), st.integers(0, 2**31))
def test_lipschitz_below_bound(n, d, seed):
    g = GrowthPair(DepthGrowth.constant(4), CoeffGrowth.poly_log(1.5, 0.3, 0.0))
    net = random_budget_network(n, g, d, np.random.default_rng(seed))
    est = empirical_lipschitz(net, 300, seed)
    l1b, linfb = lipschitz_bound(n, g, d)
    assert est.l1 <= l1b * (1 + 1e-9)
    assert est.linf <= linfb * (1 + 1e-9)


def test_covering_examples():
    f = lambda X: X[:, 0]
    assert empirical_covering(FunctionClassSample.from_functions([f]), 0.1) == 1
    g = lambda X: X[:, 0] + 0.3
    assert empirical_covering(FunctionClassSample.from_functions([f, g]), 0.1) == 2
    growths = GrowthPair(DepthGrowth.constant(2), CoeffGrowth.poly_log())
    cls = FunctionClassSample.enumerate_networks(2, growths)
    assert empirical_covering(cls, 0.25) <= covering_bound(0.25, 2, growths, 1)


def test_covering_rejects_bad_eps():
    with pytest.raises(ValueError):
        empirical_covering(FunctionClassSample.from_functions([lambda X: X[:, 0]]), 0.0)


def test_vc_examples():
    pool = np.linspace(0.05, 0.95, 10)
    thr = ShatterInstance(pool, threshold_class(np.linspace(0, 1, 41)))
    assert vc_bruteforce(thr) == 1 == vc_by_dichotomies(thr)
    const = ShatterInstance(pool, constant_class([0.5]))
    assert vc_bruteforce(const) == 0 == vc_by_dichotomies(const)


def test_vc_single_relu_dual_oracle():
    inst = ShatterInstance(np.linspace(-1, 1, 8), single_relu_class())
    v = vc_bruteforce(inst)
    assert v == vc_by_dichotomies(inst)
    assert inst.dichotomy_count() <= 2 ** 8
    assert v <= vc_bound(4)


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_vc_routes_agree_on_random_classes(seed):
    rng = np.random.default_rng(seed)
    fs = [lambda X, a=a, b=b: np.sin(a * X[:, 0] + b) for a, b in rng.uniform(-6, 6, (15, 2))]
    inst = ShatterInstance(rng.random(6), fs)
    assert vc_bruteforce(inst) == vc_by_dichotomies(inst)


def test_zero_network_is_constant():
    assert empirical_lipschitz(zero_network(2), 100) == (0.0, 0.0)
