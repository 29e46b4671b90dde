import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from censacv.asymptotics import BernoulliCensor, ConstantCensor, ar1_acv
from censacv.errors import CensacvError, LagOutOfRange, Unavailable
from censacv.estimators import parzen_acv
from censacv.series import ModulatedSeries
from censacv.simulators import AR1, ARCH, Gaussian, simulate
from censacv.spectral import (SpectralFunctional, default_max_lag, dual_error, integrated_functional,
                              modified_periodogram, sobolev_norm, spectral_convergence_experiment, trig_sum,
                              true_functional)


@pytest.fixture(scope="module")
def ar_series():
    x = simulate(AR1(0.5), 2000, 8)
    rng = np.random.default_rng(8)
    c = (rng.random(2000) < 0.8).astype(float)
    return ModulatedSeries(c * x, c)


def test_periodogram_at_zero_and_symmetry(ar_series):
    per = modified_periodogram(ar_series, [0.0, 0.7, -0.7], max_lag=6)
    gam = [parzen_acv(ar_series, l).gamma_tilde for l in range(7)]
    assert per.values[0] == pytest.approx(gam[0] + 2 * sum(gam[1:]), rel=1e-12)
    assert per.values[1] == per.values[2]
    assert per.max_lag == 6


def test_periodogram_white_noise_flat():
    x = simulate(AR1(0.0), 100_000, 4)
    per = modified_periodogram(ModulatedSeries(x, np.ones(len(x))), max_lag=20)
    assert per.values.mean() == pytest.approx(1.0, abs=0.05)


def test_periodogram_flags_and_errors():
    s = ModulatedSeries([1, 0, 2, 0, 3, 0, 1, 0], [1, 0, 1, 0, 1, 0, 1, 0])
    per = modified_periodogram(s, [0.0], max_lag=3)
    assert per.flagged_lags == [1, 3]
    with pytest.raises(LagOutOfRange):
        modified_periodogram(s, [0.0], max_lag=8)
    with pytest.raises(CensacvError):
        modified_periodogram(s, [4.0], max_lag=2)
    assert per.to_csv().startswith("lambda,periodogram\n")


def test_trig_sum_closed_form_ar1():
    phi, L = 0.5, 25
    acv = ar1_acv(phi)
    gam = np.array([acv.gamma(l) for l in range(L + 1)])
    lam = np.linspace(-np.pi, np.pi, 33)
    # closed form of sum_{|l|<=L} phi^|l| e^{-i l lam}
    z = phi * np.exp(1j * lam)
    geo = (z * (1 - z**L) / (1 - z)).real
    expect = acv.gamma(0) * (1 + 2 * geo)
    np.testing.assert_allclose(trig_sum(gam, lam), expect, rtol=1e-12, atol=1e-13)


def test_integrated_functional_examples(ar_series):
    g0 = SpectralFunctional({0: 1.0})
    assert integrated_functional(ar_series, g0) == pytest.approx(parzen_acv(ar_series, 0).gamma_tilde, rel=1e-14)
    cos = SpectralFunctional({1: 0.5, -1: 0.5})
    assert integrated_functional(ar_series, cos) == pytest.approx(parzen_acv(ar_series, 1).gamma_tilde, rel=1e-14)
    assert integrated_functional(ar_series, SpectralFunctional({})) == 0.0
    with pytest.raises(CensacvError):
        integrated_functional(ar_series, SpectralFunctional({4: 1.0}), max_lag=2)


@pytest.mark.parametrize("coeffs", [{0: 1.0}, {0: 1, 1: 0.5, 2: 0.25, 3: 0.125}, {2: -0.3, 5: 1.1}])
def test_quadrature_consistency(ar_series, coeffs):
    g = SpectralFunctional(coeffs)
    L = max(g.support, 1)
    lam = np.linspace(-np.pi, np.pi, 4096)
    per = modified_periodogram(ar_series, lam, max_lag=L)
    quad = integrate.trapezoid(g(lam) * per.values, lam) / (2 * np.pi)
    assert integrated_functional(ar_series, g, max_lag=L) == pytest.approx(quad, rel=1e-6)


def test_functional_validation():
    with pytest.raises(CensacvError):
        SpectralFunctional({1: 1.0, -1: 2.0})
    with pytest.raises(CensacvError):
        SpectralFunctional({0: 1.0}, sobolev_index=1.0)
    g = SpectralFunctional({-2: 0.5, 0: 1.0})
    assert g.coeffs == {0: 1.0, 2: 0.5} and g.support == 2 and g.coefficient(-2) == 0.5


def test_sobolev_norm_examples():
    assert sobolev_norm(SpectralFunctional({0: 1.0}, 3.5)) == 1.0
    assert sobolev_norm(SpectralFunctional({1: 1.0}, 2)) == pytest.approx(2 * math.sqrt(2))
    assert sobolev_norm(SpectralFunctional({})) == 0.0


def test_dual_error_examples():
    assert dual_error({1: 0.8}, 2) == pytest.approx(0.8 / math.sqrt(2))
    assert dual_error([0.0, 0.0, 0.0], 2) == 0.0
    assert dual_error({0: -1.5}, 4) == 1.5
    with pytest.raises(CensacvError):
        dual_error({0: 1.0}, 0.5)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.integers(0, 7), st.floats(0, 5),
       st.floats(1.1, 4))
def test_dual_error_monotone(d, idx, bump, s):
    idx = idx % len(d)
    bigger = list(d)
    bigger[idx] = math.copysign(abs(d[idx]) + bump, d[idx])
    assert dual_error(bigger, s) >= dual_error(d, s)
    assert (dual_error(d, s) == 0) == all(v == 0 for v in d)


def test_default_max_lag():
    assert default_max_lag(1000) == 10 and default_max_lag(8) == 2 and default_max_lag(1) == 1


def test_true_functional():
    acv = ar1_acv(0.5)
    g = SpectralFunctional({0: 1.0, 1: 0.5})
    assert true_functional(acv.gamma, g) == pytest.approx(4 / 3 + 2 / 3)


def test_convergence_small_with_censoring():
    g = SpectralFunctional({0: 1, 1: 0.5, 2: 0.25, 3: 0.125})
    rep = spectral_convergence_experiment(AR1(0.5, Gaussian(1.0)), BernoulliCensor(0.7), g,
                                          [2**k for k in range(8, 12)], 150, seed=2)
    assert rep.strictly_decreasing
    assert -1.3 < rep.slope < -0.7


def test_convergence_needs_analytic_gamma():
    with pytest.raises(Unavailable):
        spectral_convergence_experiment(ARCH(), ConstantCensor(1.0), SpectralFunctional({0: 1.0}), [64, 128], 5, 0)


def test_convergence_parallel_invariance():
    g = SpectralFunctional({0: 1, 1: 0.5})
    a = spectral_convergence_experiment(AR1(0.5), ConstantCensor(1.0), g, [128, 256], 130, 4, threads=1)
    b = spectral_convergence_experiment(AR1(0.5), ConstantCensor(1.0), g, [128, 256], 130, 4, threads=4)
    assert a.to_dict() == b.to_dict()
