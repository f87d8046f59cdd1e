import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from samplinglab.algorithms import StandardMC, ZeroAlgorithm
from samplinglab.approx_space import RateInterval
from samplinglab.hat_constructions import PiecewiseLinear
from samplinglab.rates import (ERROR_FLOOR, ErrorCurve, InsufficientDataError, fit_rate,
                               geometric_grid, run_rate_experiment)


def curve(ms, errs):
    return ErrorCurve(list(ms), list(errs), [0.0] * len(ms))


def test_exact_power_laws():
    ms = geometric_grid(4, 4096)
    rep = fit_rate(curve(ms, [1 / m for m in ms]))
    assert rep.beta_hat == pytest.approx(1.0, abs=1e-12)
    assert rep.residual == pytest.approx(0.0, abs=1e-12)
    rep = fit_rate(curve(ms, [3 * m ** -0.5 for m in ms]))
    assert rep.beta_hat == pytest.approx(0.5, abs=1e-12)


@given(st.floats(1e-6, 1e6), st.lists(st.floats(1e-3, 1.0), min_size=4, max_size=10))
def test_scale_invariance(c, errs):
    ms = [2 ** i for i in range(len(errs))]
    a = fit_rate(curve(ms, errs)).beta_hat
    b = fit_rate(curve(ms, [c * e for e in errs])).beta_hat
    assert a == pytest.approx(b, abs=1e-12)


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        fit_rate(curve([1, 2], [1.0, 0.5]))


def test_curve_validation():
    with pytest.raises(ValueError):
        curve([2, 1, 4], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        curve([1, 2, 4], [1.0, -1.0, 1.0])


def test_flooring_recorded():
    rep = fit_rate(curve([1, 2, 4, 8], [1.0, 0.5, 0.0, 0.0]))
    assert rep.floored == 2 and np.isfinite(rep.beta_hat)
    assert ERROR_FLOOR == 1e-13


def test_verdicts_and_json():
    ms = geometric_grid(4, 256)
    rep = fit_rate(curve(ms, [m ** -0.6 for m in ms]), RateInterval(0.5, 0.5, "integral", "mc"))
    assert rep.upper_respected and rep.lower_witnessed
    doc = json.loads(rep.to_json())
    assert doc["upper_respected"] is True and doc["lower"] == 0.5
    assert fit_rate(curve(ms, [m ** -0.6 for m in ms]), (0.1, 0.3)).upper_respected is False


def test_geometric_grid():
    assert geometric_grid(16, 8192) == [2 ** i for i in range(4, 14)]


def test_zero_algorithm_constant_error():
    one = PiecewiseLinear.constant(1.0)
    c = run_rate_experiment(lambda m: ZeroAlgorithm(m, 1, "integral"), [1, 2, 4, 8], "integral", target=one)
    assert c.error == [1.0, 1.0, 1.0, 1.0]


def test_standard_mc_slope():
    f = lambda X: np.exp(X[:, 0])
    ms = geometric_grid(4, 2 ** 14)
    c = run_rate_experiment(lambda m: StandardMC(m, 1), ms, "integral", target=f, trials=100, seed=2)
    rep = fit_rate(c)
    assert 0.4 <= rep.beta_hat <= 0.6
    csv_text = c.to_csv()
    assert csv_text.splitlines()[0] == "m,error,stderr" and len(csv_text.splitlines()) == len(ms) + 1


def test_run_rate_experiment_needs_one_target():
    with pytest.raises(ValueError):
        run_rate_experiment(lambda m: ZeroAlgorithm(m, 1, "integral"), [1, 2, 4], "integral")
