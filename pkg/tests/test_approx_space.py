import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplinglab.approx_space import (INF, CoeffGrowth, DepthGrowth, GrowthPair, InfeasibleWitnessError,
                                      RateInterval, SpaceParams, beta_star_integration, beta_star_l2,
                                      beta_star_uniform, derive_witness, ell_star, gamma_closed_form,
                                      gamma_defining_check, integral_det_upper,
                                      integral_det_upper_min_form, integral_mc_upper, l2_upper,
                                      l2_upper_min_form, lipschitz_bound,
                                      optimization_lemma_closed_form, optimization_lemma_oracle)


def pair(L, theta=0.0, kappa=0.0, s=1.0):
    depth = DepthGrowth.unbounded() if L == INF else DepthGrowth.constant(L)
    return GrowthPair(depth, CoeffGrowth.poly_log(s, theta, kappa))


def test_ell_star():
    assert ell_star(DepthGrowth.constant(3)) == 3
    assert ell_star(DepthGrowth.unbounded()) == INF
    assert ell_star(DepthGrowth.log_power(1, 1)) == INF
    assert ell_star(DepthGrowth.log_power(1, 1, cap=6)) == 6


def test_gamma_closed_form_examples():
    assert gamma_closed_form(pair(3, theta=1.0)) == (4, 4)
    assert gamma_closed_form(pair(2)) == (1, 1)
    assert gamma_closed_form(pair(INF)) == (INF, INF)


def test_gamma_defining_check_examples():
    g = pair(3, theta=1.0)
    assert gamma_defining_check(g, 3.9, "flat", 10**4)
    assert not gamma_defining_check(g, 4.1, "flat", 10**4)
    assert gamma_defining_check(g, 0.0, "flat", 10**4)


@settings(max_examples=20)
@given(st.integers(2, 6), st.one_of(st.just(0.0), st.floats(0.25, 2.0)), st.floats(0.05, 0.5))
def test_gamma_defining_check_brackets_closed_form(L, theta, gap):
    # for small positive theta, ceil(n^theta) is a short staircase below 10^6 and the
    # limit exponent cannot be resolved on a finite range
    g = pair(L, theta=theta)
    gf, _ = gamma_closed_form(g)
    assert gamma_defining_check(g, gf - gap, "flat", 10**6)
    assert not gamma_defining_check(g, gf + gap, "flat", 10**6)
    assert gamma_defining_check(g, gf + gap, "sharp", 10**6)


def test_witness_for_constant_c():
    w = derive_witness(pair(3), 0.5, depth=3)
    assert (w.L, w.C1, w.n0) == (3, 1.0, 1)
    assert derive_witness(pair(3), 0.5).L == 2
    with pytest.raises(InfeasibleWitnessError):
        derive_witness(pair(3), 1.0)


@given(st.integers(2, 5), st.floats(0.0, 1.5), st.floats(-1.0, 1.0), st.floats(0.05, 0.95))
def test_witness_inequality_holds(L, theta, kappa, frac):
    g = pair(L, theta, kappa)
    gf, _ = gamma_closed_form(g)
    gamma = frac * gf
    w = derive_witness(g, gamma)
    n = np.unique(np.geomspace(1, 10**8, 400).astype(np.int64)).astype(np.float64)
    c = g.coeff.values(n)
    assert np.all(n ** gamma <= w.C1 * c ** w.L * n ** (w.L // 2) * (1 + 1e-9))
    assert g.ell(w.n0) >= w.L


def test_lipschitz_bound_examples():
    assert lipschitz_bound(1, pair(2), 1) == (1.0, 1.0)
    assert lipschitz_bound(4, pair(3, s=2.0), 3) == (32.0, 96.0)
    assert lipschitz_bound(9, pair(5), 2) == (81.0, 162.0)


def test_uniform_rate_examples():
    assert beta_star_uniform(SpaceParams(1, 1.0, pair(3))).upper == 0.5
    assert beta_star_uniform(SpaceParams(1, 1.0, pair(3))).lower == 0.5
    assert beta_star_uniform(SpaceParams(2, 1.0, pair(3))).upper == 0.25
    assert beta_star_uniform(SpaceParams(1, 1.0, pair(INF))).upper == 0.0
    assert not beta_star_uniform(SpaceParams(1, 1.0, pair(2))).certified


def test_l2_rate_examples():
    assert l2_upper(3.0, 1.0) == pytest.approx(1.25, abs=1e-15)
    assert l2_upper(0.4, 1.0) == pytest.approx(0.8 / 1.4, abs=1e-15)
    iv = beta_star_l2(SpaceParams(1, 1e9, pair(INF)))
    assert iv.lower == pytest.approx(0.5, abs=1e-8) and iv.upper == 0.5


def test_integration_rate_examples():
    assert integral_det_upper(1.0, 1.0) == 1.0
    assert integral_mc_upper(2.0, 4.0) == pytest.approx(1.3, abs=1e-15)
    assert beta_star_integration(SpaceParams(1, 1e9, pair(INF)), "mc").upper == 1.0


def test_optimization_lemma_examples():
    assert optimization_lemma_closed_form(1.0, 3.0, "lemma1") == 0.75
    assert optimization_lemma_closed_form(1.0, 1.0, "lemma2") == 0.0
    for a in (0.5, 2.0):
        assert optimization_lemma_oracle(INF, a, "lemma2") <= min(a - 1, 0.0) + 1e-6


alphas = st.floats(0.01, 50.0)
gammas = st.one_of(st.floats(1.0, 100.0), st.just(INF))


@given(alphas, gammas)
def test_min_form_twins_agree(a, g):
    assert l2_upper(a, g) == pytest.approx(l2_upper_min_form(a, g), abs=1e-12)
    assert integral_det_upper(a, g) == pytest.approx(integral_det_upper_min_form(a, g), abs=1e-12)
    # the Monte Carlo integration bound is the L2 bound shifted by 1/2 in every case
    assert integral_mc_upper(a, g) == pytest.approx(0.5 + l2_upper_min_form(a, g), abs=1e-12)


@given(st.integers(1, 3), alphas, st.sampled_from([2, 3, 4, 7, INF]), st.floats(0.0, 3.0))
def test_rate_interval_invariants(d, a, L, theta):
    p = SpaceParams(d, a, pair(L, theta))
    u, l2 = beta_star_uniform(p), beta_star_l2(p)
    det, mc = beta_star_integration(p, "det"), beta_star_integration(p, "mc")
    for iv in (u, l2, det, mc):
        assert iv.lower <= iv.upper
    assert u.upper <= 1 / d
    assert l2.upper <= 1.5
    assert mc.upper <= 2


@given(st.floats(0.05, 20.0), st.floats(1.0, 30.0), st.floats(1.0001, 1.5))
def test_monotone_in_alpha_and_gamma(a, g, f):
    for fn in (l2_upper, integral_det_upper, integral_mc_upper):
        assert fn(a * f, g) >= fn(a, g) - 1e-12
        assert fn(a, g * f) <= fn(a, g) + 1e-12


def test_rate_interval_rejects_empty():
    with pytest.raises(ValueError):
        RateInterval(1.0, 0.5, "uniform", "det")


@given(st.floats(0.05, 5.0), st.floats(1.0, 8.0), st.sampled_from(["lemma1", "lemma2"]))
def test_optimization_oracle_brackets_closed_form(a, g, obj):
    cf = optimization_lemma_closed_form(g, a, obj)
    v = optimization_lemma_oracle(g, a, obj, grid=60)
    assert cf - 1e-3 <= v <= cf + 1e-6
