"""Modified periodogram and integrated spectral functionals from Parzen autocovariances.

Conventions: ``g(lam) = sum_l g_l e^{i l lam}`` is even and real, the spectral
density is ``f(lam) = (2 pi)^-1 sum_l gamma(l) e^{-i l lam}``, hence

    J(g) = int_{-pi}^{pi} g f dlam = sum_l gamma(l) g_l

and the plug-in ``J_tilde(g) = sum_l gamma_tilde(l) g_l``. Errors are measured
in the dual Sobolev norm ``||T||^2 = sum_l (1+|l|)^-s T(e_l)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import stats

from . import streams
from .asymptotics import CensorModel
from .errors import CensacvError, LagOutOfRange, Unavailable
from .estimators import MeanMode, acv_profile, parzen_acv_batch
from .ratio import loglog_slope
from .series import ModulatedSeries
from .simulators import DEFAULT_BURNIN, ProcessModel, analytic_gamma, simulate_batch, simulate_censor_batch


@dataclass(frozen=True)
class SpectralFunctional:
    """Even trigonometric polynomial given by its Fourier coefficients.

    ``coeffs`` maps lag to ``g_l``. Negative lags are folded onto positive
    ones and must agree with them.
    """

    coeffs: Mapping[int, float]
    sobolev_index: float = 2.0

    def __post_init__(self):
        if not self.sobolev_index > 1:
            raise CensacvError(f"Sobolev index must exceed 1, got {self.sobolev_index}")
        folded: dict[int, float] = {}
        for lag, value in dict(self.coeffs).items():
            lag, value = abs(int(lag)), float(value)
            if lag in folded and folded[lag] != value:
                raise CensacvError(f"g_{lag} and g_-{lag} differ; the functional must be even")
            folded[lag] = value
        object.__setattr__(self, "coeffs", dict(sorted(folded.items())))

    @property
    def support(self) -> int:
        nonzero = [lag for lag, v in self.coeffs.items() if v != 0]
        return max(nonzero, default=0)

    def coefficient(self, lag: int) -> float:
        return self.coeffs.get(abs(int(lag)), 0.0)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        for lag, g in self.coeffs.items():
            out = out + (g if lag == 0 else 2 * g * np.cos(lag * lam))
        return out

    def to_dict(self) -> dict:
        return {"coeffs": {str(k): v for k, v in self.coeffs.items()}, "s": self.sobolev_index}


@dataclass(frozen=True)
class DualError:
    discrepancies: dict
    sobolev_index: float
    value: float


def sobolev_norm(g: SpectralFunctional) -> float:
    s = g.sobolev_index
    terms = [(1 + lag) ** s * v * v * (1 if lag == 0 else 2) for lag, v in g.coeffs.items()]
    return math.sqrt(math.fsum(terms))


def dual_error(d, s: float) -> float:
    """Dual-norm size of per-lag discrepancies given for ``l >= 0`` and mirrored.

    ``d`` is a mapping ``lag -> d_l`` or a sequence indexed from lag 0.
    """
    if not s > 1:
        raise CensacvError(f"Sobolev index must exceed 1, got {s}")
    items = d.items() if isinstance(d, Mapping) else enumerate(d)
    pairs = []
    for lag, v in items:
        lag = int(lag)
        if lag < 0:
            raise CensacvError("give discrepancies for non-negative lags only")
        pairs.append((lag, float(v)))
    scale = max((abs(v) for _, v in pairs), default=0.0)
    if scale == 0:
        return 0.0
    # rescale before squaring so tiny discrepancies do not underflow
    terms = [(1 if lag == 0 else 2) * (1 + lag) ** -s * (v / scale) ** 2 for lag, v in pairs]
    return scale * math.sqrt(math.fsum(terms))


def dual_error_sq_batch(d: np.ndarray, s: float) -> np.ndarray:
    """Squared dual error for rows of discrepancies ``d[:, l]``, ``l = 0..L``."""
    lags = np.arange(d.shape[-1])
    w = np.where(lags == 0, 1.0, 2.0) * (1.0 + lags) ** -s
    return (d * d) @ w


def default_max_lag(n: int) -> int:
    return max(1, int(math.floor(n ** (1 / 3) + 1e-9)))


@dataclass
class Periodogram:
    lambdas: np.ndarray
    values: np.ndarray
    max_lag: int
    flagged_lags: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["lambda,periodogram"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(self.lambdas, self.values)]
        return "\n".join(lines) + "\n"


def _gamma_vector(series, max_lag, mode):
    if max_lag >= series.N:
        raise LagOutOfRange(f"max lag {max_lag} must be below N={series.N}")
    profile = acv_profile(series, max_lag, mode)
    flagged = [e.lag for e in profile if e.flag is not None]
    gam = np.array([0.0 if e.flag is not None else e.gamma_tilde for e in profile])
    return gam, flagged


def trig_sum(gamma: np.ndarray, lambdas) -> np.ndarray:
    """``gamma_0 + 2 sum_{l>=1} gamma_l cos(l lam)``."""
    lam = np.asarray(lambdas, dtype=float)
    lags = np.arange(1, len(gamma))
    return gamma[0] + 2 * np.cos(np.multiply.outer(lam, lags)) @ gamma[1:]


def modified_periodogram(series: ModulatedSeries, lambdas=None, max_lag: int | None = None,
                         mode: MeanMode | str = MeanMode.MODULATED) -> Periodogram:
    """Truncated periodogram ``sum_{|l|<=L} gamma_tilde(l) e^{-i l lam}``.

    Lags without co-observed pairs contribute zero and are listed in
    ``flagged_lags``. ``L`` defaults to ``floor(N^(1/3))``.
    """
    if lambdas is None:
        lambdas = np.linspace(-np.pi, np.pi, 257)
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.abs(lambdas) > np.pi + 1e-12):
        raise CensacvError("frequencies must lie in [-pi, pi]")
    L = default_max_lag(series.N) if max_lag is None else int(max_lag)
    gam, flagged = _gamma_vector(series, L, mode)
    return Periodogram(lambdas, trig_sum(gam, lambdas), L, flagged)


def integrated_functional(series: ModulatedSeries, g: SpectralFunctional, max_lag: int | None = None,
                          mode: MeanMode | str = MeanMode.MODULATED) -> float:
    """``J_tilde(g) = sum_{|l|<=L} gamma_tilde(|l|) g_l``; ``L`` defaults to the support of ``g``."""
    L = g.support if max_lag is None else int(max_lag)
    if g.support > L:
        raise CensacvError(f"functional support {g.support} exceeds max lag {L}")
    gam, _ = _gamma_vector(series, L, mode)
    return math.fsum((1 if lag == 0 else 2) * gam[lag] * v for lag, v in g.coeffs.items() if lag <= L)


def true_functional(gamma, g: SpectralFunctional) -> float:
    return math.fsum((1 if lag == 0 else 2) * gamma(lag) * v for lag, v in g.coeffs.items())


# --------------------------------------------------------------------------------------
# convergence experiment


@dataclass
class SpectralReport:
    config: dict
    n_grid: list
    mean_sq_dual_error: list
    slope: float
    intercept: float
    strictly_decreasing: bool
    normality: dict

    def to_dict(self) -> dict:
        return {
            "experiment": "spectral_convergence",
            "config": self.config,
            "n_grid": self.n_grid,
            "mean_sq_dual_error": self.mean_sq_dual_error,
            "slope": self.slope,
            "intercept": self.intercept,
            "strictly_decreasing": self.strictly_decreasing,
            "normality": self.normality,
        }


def spectral_convergence_experiment(process: ProcessModel, censor: CensorModel, g: SpectralFunctional,
                                    n_grid, replicates: int, seed: int, mode=MeanMode.NONE,
                                    burnin: int = DEFAULT_BURNIN, threads: int | None = 1) -> SpectralReport:
    """Monte Carlo estimate of ``E ||J_tilde - J||^2`` in the dual norm at each ``N``.

    The dual norm runs over lags ``|l| <= support(g)``. Replicate ``r`` at grid
    index ``i`` uses streams keyed by ``i * replicates + r``. The normality
    check standardises ``sqrt(N) (J_tilde(g) - J(g))`` at the largest ``N``
    with its own sample moments and reports the KS distance to N(0, 1).
    """
    acv = analytic_gamma(process)
    if acv is None:
        raise Unavailable(f"no analytic autocovariance for {process.name}")
    mode = MeanMode.parse(mode)
    n_grid = sorted(int(n) for n in n_grid)
    L = g.support
    true_gamma = np.array([acv.gamma(lag) for lag in range(L + 1)])
    gvec = np.array([g.coefficient(lag) for lag in range(L + 1)]) * np.where(np.arange(L + 1) == 0, 1.0, 2.0)
    s = g.sobolev_index

    mse, last_j = [], None
    for i, n in enumerate(n_grid):
        def work(start, stop, n=n, i=i):
            reps = range(i * replicates + start, i * replicates + stop)
            x = simulate_batch(process, n, seed, reps, burnin)
            c = simulate_censor_batch(censor, n, seed, reps)
            gam = np.column_stack([parzen_acv_batch(c * x, c, lag, mode)[0] for lag in range(L + 1)])
            return gam

        gam = np.concatenate(streams.chunked_map(work, replicates, threads))
        if np.any(np.isnan(gam)):
            raise CensacvError("zero-overlap lag inside the functional support")
        d = gam - true_gamma
        mse.append(float(dual_error_sq_batch(d, s).mean()))
        last_j = math.sqrt(n) * (d @ gvec)

    slope, intercept = loglog_slope(n_grid, mse)
    z = (last_j - last_j.mean()) / last_j.std(ddof=1)
    ks = float(stats.kstest(z, "norm").statistic)
    return SpectralReport(
        config={"process": process.spec(), "censor": censor.spec(), "g": g.to_dict(),
                "replicates": int(replicates), "seed": int(seed), "mean_mode": mode.value, "burnin": int(burnin)},
        n_grid=n_grid,
        mean_sq_dual_error=mse,
        slope=slope,
        intercept=intercept,
        strictly_decreasing=all(b < a for a, b in zip(mse, mse[1:])),
        normality={"N": n_grid[-1], "ks_fitted_normal": ks, "replicates": int(replicates)},
    )
