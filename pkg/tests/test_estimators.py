import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from censacv.errors import LagOutOfRange, ZeroOverlap, ZeroVariance
from censacv.estimators import (MeanMode, acv_profile, nu_hat, parzen_acf, parzen_acv, parzen_acv_batch)
from censacv.series import ModulatedSeries


def textbook_acv(x, lag):
    """Sample autocovariance with divisor N - lag, written out as a plain loop."""
    n = len(x)
    mean = sum(x) / n
    total = 0.0
    for i in range(n - lag):
        total += (x[i] - mean) * (x[i + lag] - mean)
    return total / (n - lag)


def test_nu_hat_examples():
    assert nu_hat([1, 0, 1, 0, 1], 2) == pytest.approx(2 / 3)
    assert nu_hat(np.ones(7), 3) == 1.0
    assert nu_hat(np.zeros(5), 1) == 0.0
    with pytest.raises(LagOutOfRange):
        nu_hat([1, 1], 2)


def test_parzen_alternating():
    s = ModulatedSeries([1, -1, 1, -1], np.ones(4))
    est = parzen_acv(s, 1, MeanMode.MODULATED)
    assert est.gamma_tilde == -1.0
    assert est.nu_hat == 1.0 and est.pair_weight_sum == 3.0 and est.n_terms == 3
    assert parzen_acf(s, 1) == -1.0


def test_parzen_full_observation_matches_textbook():
    x = np.random.default_rng(1).standard_normal(200)
    s = ModulatedSeries(x, np.ones(200))
    for lag in (0, 1, 5, 50):
        assert parzen_acv(s, lag).gamma_tilde == pytest.approx(textbook_acv(list(x), lag), rel=1e-12)


def test_zero_overlap():
    s = ModulatedSeries([1, 0, 1, 0], [1, 0, 1, 0])
    with pytest.raises(ZeroOverlap):
        parzen_acv(s, 1)
    with pytest.raises(LagOutOfRange):
        parzen_acv(s, 4)


def test_acf_lag_zero_and_zero_variance():
    s = ModulatedSeries([3.0, 1.0, 2.0], np.ones(3))
    assert parzen_acf(s, 0) == 1.0
    with pytest.raises(ZeroVariance):
        parzen_acf(ModulatedSeries([2.0] * 5, np.ones(5)), 1)


def test_profile_flags():
    s = ModulatedSeries(np.arange(10.0), np.ones(10))
    prof = acv_profile(s, 3)
    assert len(prof) == 4 and all(e.flag is None for e in prof)
    alt = ModulatedSeries([1, 0, 2, 0, 3, 0], [1, 0, 1, 0, 1, 0])
    prof = acv_profile(alt, 2)
    assert prof[1].flag == "zero_overlap" and math.isnan(prof[1].gamma_tilde)
    assert prof[0].flag is None and prof[2].flag is None
    assert prof[1].to_dict()["gamma_tilde"] is None


def test_mean_modes():
    s = ModulatedSeries([2.0, 0.0, 4.0, 6.0], [1.0, 0.0, 1.0, 1.0])
    # ratio mean = 12 / 3 = 4, applied to observed points only
    z = np.array([-2.0, 0.0, 0.0, 2.0])
    expected = (z[:-1] @ z[1:]) / 1.0  # only pair (2, 3) is co-observed
    assert parzen_acv(s, 1, "ratio").gamma_tilde == expected
    zm = np.array([2.0, 0.0, 4.0, 6.0]) - 3.0
    assert parzen_acv(s, 1, "modulated").gamma_tilde == pytest.approx((zm[:-1] @ zm[1:]) / 1.0)
    assert parzen_acv(s, 1, "none").gamma_tilde == 24.0
    with pytest.raises(ValueError):
        MeanMode.parse("median")


def test_nu_hat_invariant():
    rng = np.random.default_rng(2)
    s = ModulatedSeries(rng.standard_normal(50), rng.random(50))
    e = parzen_acv(s, 3)
    assert e.nu_hat == pytest.approx(e.pair_weight_sum / e.n_terms, rel=1e-15)
    assert e.n_terms == 47 and 0 <= e.nu_hat <= 1


series_strategy = st.integers(5, 60).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(-100, 100)),
    arrays(np.float64, n, elements=st.sampled_from([0.0, 0.5, 1.0, 0.2]))))


@given(series_strategy, st.integers(0, 4))
def test_reversal_symmetry(yc, lag):
    y, c = yc
    s = ModulatedSeries(y, c)
    fwd = acv_profile(s, lag, "none")[lag]
    rev = acv_profile(s.reversed(), lag, "none")[lag]
    if fwd.flag is None:
        assert fwd.gamma_tilde == rev.gamma_tilde
    else:
        assert rev.flag == fwd.flag


@given(series_strategy, st.sampled_from([2.0, -0.5, 4.0, 0.25]))
def test_scale_equivariance(yc, a):
    y, c = yc
    base = ModulatedSeries(y, c)
    scaled = ModulatedSeries(a * y, c)
    e0 = acv_profile(base, 2, "none")[2]
    e1 = acv_profile(scaled, 2, "none")[2]
    if e0.flag is None:
        # powers of two keep the products exact
        assert e1.gamma_tilde == a * a * e0.gamma_tilde


@settings(max_examples=30)
@given(arrays(np.float64, 40, elements=st.floats(-10, 10)), st.floats(0.1, 10))
def test_acf_scale_invariance(y, a):
    s0 = ModulatedSeries(y, np.ones(40))
    if parzen_acv(s0, 0).gamma_tilde < 1e-6:
        return
    assert parzen_acf(ModulatedSeries(a * y, np.ones(40)), 2) == pytest.approx(parzen_acf(s0, 2), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("kappa", [1.0, 0.7, 0.3])
def test_constant_modulation_cancels(kappa):
    x = np.random.default_rng(4).standard_normal(300)
    base = parzen_acv(ModulatedSeries(x, np.ones(300)), 2, "none").gamma_tilde
    mod = parzen_acv(ModulatedSeries(kappa * x, np.full(300, kappa)), 2, "none").gamma_tilde
    assert mod == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("mode", list(MeanMode))
def test_batch_matches_scalar(mode):
    rng = np.random.default_rng(5)
    y = rng.standard_normal((6, 80))
    c = (rng.random((6, 80)) < 0.6).astype(float)
    y = y * c
    for lag in (0, 1, 7):
        g, nu = parzen_acv_batch(y, c, lag, mode)
        for r in range(6):
            e = parzen_acv(ModulatedSeries(y[r], c[r]), lag, mode)
            assert g[r] == pytest.approx(e.gamma_tilde, rel=1e-12)
            assert nu[r] == pytest.approx(e.nu_hat, rel=1e-14)
