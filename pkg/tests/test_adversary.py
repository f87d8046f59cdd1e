import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplinglab.adversary import (DeterministicIntegrationFamily, HardnessReport, HatSumFamily,
                                   annihilation_set, average_case_error, hardness_bound,
                                   l2_or_integration_hardness_family, uniform_hardness_family)
from samplinglab.algorithms import (BudgetExceededError, MidpointRule, ZeroAlgorithm, error_norm,
                                    exact_integral)
from samplinglab.approx_space import SpaceParams
from samplinglab.hat_constructions import lambda_eval, unit_ball_centers, vartheta_eval


@pytest.fixture
def space(c1_l3):
    return SpaceParams(1, 1.0, c1_l3)


def test_annihilation_examples():
    assert annihilation_set(np.array([[0.25]]), 1).indices == (2,)
    assert annihilation_set(np.array([[0.05], [0.125], [0.2]]), 2).indices == (2, 3, 4)
    assert annihilation_set(np.array([[1.5], [2.0]]), 2).indices == (1, 2, 3, 4)


@given(st.integers(1, 32), st.integers(0, 2**31))
def test_annihilation_size_and_definition(m, seed):
    rng = np.random.default_rng(seed)
    x = rng.random((m, 2))
    idx = annihilation_set(x, m)
    assert len(idx) >= m
    z = unit_ball_centers(m)
    for i in idx.indices:
        assert np.all(lambda_eval(4 * m, z[i - 1], x[:, 0]) == 0)


def test_uniform_family_shape(space):
    fam = uniform_hardness_family(1, space, 0.5)
    assert (fam.k, fam.M, fam.size) == (1, 4, 4)
    members = list(fam.enumerate())
    assert len(members) == 4
    for mem in members:
        lo, hi = np.array(mem.y) - 1 / fam.M, np.array(mem.y) + 1 / fam.M
        assert np.all(lo >= 0) and np.all(hi <= 1)
        assert mem.certificate().valid


def test_uniform_family_supports_disjoint(c1_l3):
    fam = uniform_hardness_family(4, SpaceParams(2, 1.0, c1_l3), 0.5)
    g = np.linspace(0, 1, 81)
    X = np.column_stack([a.ravel() for a in np.meshgrid(g, g, indexing="ij")])
    centers = [fam.center(ell) for ell in [(1, 1), (1, 2), (2, 1), (3, 4)]]
    vals = [vartheta_eval(fam.M, c, X) for c in centers]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            assert np.all(vals[i] * vals[j] == 0)


def test_hat_sum_family_size(space):
    fam = l2_or_integration_hardness_family(1, space, 0.5, 1.0, 0.0, "l2")
    assert fam.k == 1 and fam.size == 8
    fam4 = HatSumFamily(4, space, 0.5, 1.0, 0.5, "integral")
    assert fam4.k == 2 and fam4.size == 2**8 * math.comb(8, 2)
    assert fam4.k <= 2 * 4 ** 0.5
    for mem in fam4.enumerate():
        assert np.max(np.abs(mem(np.linspace(0, 1, 129)))) <= fam4.consts.amplitude(4) <= 1


def test_hardness_bound_examples(c1_l3):
    p = SpaceParams(1, 1.0, c1_l3)
    _, e = hardness_bound(4, p, 0.9, 1.0, 1.0, "integral", "mc")
    assert e == pytest.approx(1.6, abs=1e-15)
    k, e = hardness_bound(4, p, 0.5, 1.0, 0.5, "l2")
    assert e == pytest.approx(0.5 + 1.0 - 0.25, abs=1e-15)
    k, e = hardness_bound(4, p, 0.5, 1.0, 0.5, "integral", "det")
    assert e == pytest.approx(1 + 1.0 - 0.5, abs=1e-15)


def test_zero_algorithm_integral_exact(space):
    fam = HatSumFamily(4, space, 0.5, 1.0, 0.5, "integral")
    mem = fam.member((1, 5), (1.0, 1.0))
    out = ZeroAlgorithm(4, 1, "integral")(mem.function)
    err = error_norm(out, mem, "integral", 1)
    assert err == pytest.approx(fam.consts.amplitude(4) * fam.k / 16, rel=1e-13)


@pytest.mark.parametrize("problem", ["l2", "integral"])
@pytest.mark.parametrize("m", [1, 2, 4])
def test_zero_algorithm_meets_bound_exactly(space, problem, m):
    fam = l2_or_integration_hardness_family(m, space, 0.5, 1.0, 0.0, problem)
    rep = average_case_error(ZeroAlgorithm(m, 1, fam.solution), fam)
    assert rep.exact and rep.stderr == 0.0
    assert rep.measured >= rep.bound


def test_midpoint_on_integration_family(space):
    fam = l2_or_integration_hardness_family(4, space, 0.5, 1.0, 0.0, "integral")
    assert fam.k == 1
    rep = average_case_error(MidpointRule(4, 1, "integral"), fam)
    assert rep.exact and rep.passed
    kappa, exponent = hardness_bound(4, space, 0.5, 1.0, 0.0, "integral", "mc")
    assert rep.bound == pytest.approx(kappa * 4 ** (-exponent), rel=1e-14)


def test_uniform_family_zero_algorithm(c1_l3):
    for d in (1, 2):
        p = SpaceParams(d, 1.0, c1_l3)
        fam = uniform_hardness_family(2, p, 0.5)
        rep = average_case_error(ZeroAlgorithm(2, d, "uniform"), fam)
        assert rep.measured >= fam.bound
        assert fam.kappa_bound == pytest.approx(fam.consts.kappa / 8 / 4 ** d)


def test_budget_violation_detected(space):
    fam = HatSumFamily(2, space, 0.5, 1.0, 0.5, "integral")
    with pytest.raises(ValueError):
        average_case_error(MidpointRule(4, 1, "integral"), fam)

    class Greedy(MidpointRule):
        def run(self, f, seed=0):
            return float(np.mean(f(np.linspace(0, 1, self.m + 1))))

    with pytest.raises(BudgetExceededError):
        average_case_error(Greedy(2, 1, "integral"), fam)


def test_subsample_unbiased(space):
    fam = HatSumFamily(2, space, 0.5, 1.0, 0.5, "integral")
    alg = MidpointRule(2, 1, "integral")
    exact = average_case_error(alg, fam).measured
    means = [average_case_error(alg, fam, exact_limit=0, subsample=200, seed=s).measured
             for s in range(30)]
    se = np.std(means, ddof=1) / math.sqrt(len(means))
    assert abs(np.mean(means) - exact) <= 3 * se + 1e-15


class FixedPoints(MidpointRule):
    """Deterministic rule: a weighted mean over a fixed point set."""

    def __init__(self, X, w):
        super().__init__(len(X), 1, "integral")
        self.X, self.w = X, w

    def points(self):
        return self.X

    def run(self, f, seed=0):
        return float(self.w @ f(self.X))


@settings(max_examples=25)
@given(st.sampled_from([1, 2, 4, 8]), st.integers(0, 2**31))
def test_sign_symmetrization(m, seed):
    from samplinglab.approx_space import CoeffGrowth, DepthGrowth, GrowthPair
    p = SpaceParams(1, 1.0, GrowthPair(DepthGrowth.constant(3), CoeffGrowth.poly_log()))
    rng = np.random.default_rng(seed)
    alg = FixedPoints(rng.random((m, 1)), rng.uniform(-1, 1, m))
    fam = DeterministicIntegrationFamily(m, p, 0.5, 1.0, 0.5, alg.points())
    plus, minus = list(fam.enumerate())
    errs = [error_norm(alg(f.function), f, "integral", 1) for f in (plus, minus)]
    assert max(errs) >= abs(exact_integral(plus, 1))


def test_report_pass_rule_and_json():
    rep = HardnessReport("integral", "mc", "zero", 4, 0.9, 1.0, 0.05, 10, 10, False, 0)
    assert rep.passed
    assert not HardnessReport("integral", "mc", "zero", 4, 0.8, 1.0, 0.05, 10, 10, False, 0).passed
    assert rep.to_dict()["passed"] is True
