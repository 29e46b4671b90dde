"""Parzen autocovariance and autocorrelation estimators for modulated series.

For lag ``l`` the estimator is

    gamma_tilde(l) = sum_i (y_i - mu)(y_{i+l} - mu) / sum_i c_i c_{i+l}

with both sums over ``i = 1 .. N - l``. The pair-weight average
``nu_hat(l) = sum_i c_i c_{i+l} / (N - l)`` estimates ``E[C_0 C_l]``.

Single-series functions use exactly rounded summation (``math.fsum``) so
results do not depend on summation order. The ``*_batch`` variants work on
stacks of replicates and are meant for Monte Carlo loops.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import LagOutOfRange, ZeroOverlap, ZeroVariance
from .series import ModulatedSeries


class MeanMode(str, enum.Enum):
    NONE = "none"
    MODULATED = "modulated"  # subtract the plain mean of y, censored zeros included
    RATIO = "ratio"  # subtract sum(y)/sum(c), scaled by c_i

    @classmethod
    def parse(cls, value) -> "MeanMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown mean mode {value!r} (choose from {choices})") from None


@dataclass(frozen=True)
class AcvEstimate:
    lag: int
    gamma_tilde: float
    nu_hat: float
    pair_weight_sum: float
    n_terms: int
    flag: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isnan(self.gamma_tilde):
            d["gamma_tilde"] = None
        return d


def _check_lag(n: int, lag: int) -> int:
    lag = int(lag)
    if lag < 0 or lag >= n:
        raise LagOutOfRange(f"lag {lag} outside [0, {n - 1}]")
    return lag


def nu_hat(c, lag: int) -> float:
    """Average pair weight ``(N-l)^-1 sum c_i c_{i+l}``."""
    c = np.asarray(c, dtype=float)
    lag = _check_lag(c.size, lag)
    n_terms = c.size - lag
    return math.fsum(c[:n_terms] * c[lag:]) / n_terms


def centered(series: ModulatedSeries, mode: MeanMode | str = MeanMode.MODULATED) -> np.ndarray:
    """Return the centred observations used by the estimator numerator."""
    mode = MeanMode.parse(mode)
    y, c = series.y, series.c
    if mode is MeanMode.NONE:
        return y.copy()
    if mode is MeanMode.MODULATED:
        return y - math.fsum(y) / y.size
    total_weight = math.fsum(c)
    if total_weight == 0:
        return y.copy()
    return y - c * (math.fsum(y) / total_weight)


def _acv_from_centered(z: np.ndarray, c: np.ndarray, lag: int) -> AcvEstimate:
    n_terms = z.size - lag
    weight = math.fsum(c[:n_terms] * c[lag:])
    if weight <= 0:
        return AcvEstimate(lag, math.nan, 0.0, 0.0, n_terms, flag="zero_overlap")
    num = math.fsum(z[:n_terms] * z[lag:])
    return AcvEstimate(lag, num / weight, weight / n_terms, weight, n_terms)


def parzen_acv(series: ModulatedSeries, lag: int, mode: MeanMode | str = MeanMode.MODULATED) -> AcvEstimate:
    """Parzen autocovariance estimate at a single lag.

    Raises
    ------
    LagOutOfRange
        If ``lag`` is not in ``[0, N)``.
    ZeroOverlap
        If no pair ``(i, i + lag)`` is co-observed.
    """
    lag = _check_lag(series.N, lag)
    est = _acv_from_centered(centered(series, mode), series.c, lag)
    if est.flag is not None:
        raise ZeroOverlap(f"no co-observed pairs at lag {lag}")
    return est


def parzen_acf(series: ModulatedSeries, lag: int, mode: MeanMode | str = MeanMode.MODULATED) -> float:
    """Autocorrelation ``gamma_tilde(l) / gamma_tilde(0)``."""
    g0 = parzen_acv(series, 0, mode).gamma_tilde
    if g0 == 0:
        raise ZeroVariance("gamma_tilde(0) is zero")
    if int(lag) == 0:
        return 1.0
    return parzen_acv(series, lag, mode).gamma_tilde / g0


def acv_profile(series: ModulatedSeries, max_lag: int, mode: MeanMode | str = MeanMode.MODULATED) -> list[AcvEstimate]:
    """Estimates for lags ``0..max_lag``; lags without overlap are flagged, not fatal."""
    max_lag = _check_lag(series.N, max_lag)
    z = centered(series, mode)
    return [_acv_from_centered(z, series.c, lag) for lag in range(max_lag + 1)]


def acf_from_profile(profile: list[AcvEstimate]) -> list[float]:
    g0 = profile[0].gamma_tilde
    if profile[0].flag is not None or g0 == 0:
        return [math.nan] * len(profile)
    return [e.gamma_tilde / g0 for e in profile]


# --- batched versions over replicate stacks ------------------------------------------

def centered_batch(y: np.ndarray, c: np.ndarray, mode: MeanMode | str = MeanMode.NONE) -> np.ndarray:
    mode = MeanMode.parse(mode)
    if mode is MeanMode.NONE:
        return y
    if mode is MeanMode.MODULATED:
        return y - y.mean(axis=-1, keepdims=True)
    total = c.sum(axis=-1, keepdims=True)
    mu = np.divide(y.sum(axis=-1, keepdims=True), total, out=np.zeros_like(total), where=total > 0)
    return y - c * mu


def parzen_acv_batch(y: np.ndarray, c: np.ndarray, lag: int, mode: MeanMode | str = MeanMode.NONE):
    """Row-wise Parzen estimates for arrays of shape ``(R, N)``.

    Returns ``(gamma_tilde, nu_hat)``; rows without overlap give ``nan``.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    n = y.shape[-1]
    lag = _check_lag(n, lag)
    z = centered_batch(y, c, mode)
    n_terms = n - lag
    weight = np.einsum("ij,ij->i", c[:, :n_terms], c[:, lag:])
    num = np.einsum("ij,ij->i", z[:, :n_terms], z[:, lag:])
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(weight > 0, num / weight, np.nan)
    return gamma, weight / n_terms
