"""Ratio-of-means estimator ``R_hat = mean(U V) / mean(U)`` and its L^p rate.

The Parzen autocovariance is an instance with ``U_i = c_i c_{i+l}`` and
``V_i = x_i x_{i+l}``. This module holds the estimator, the moment-exponent
bookkeeping, dependence-regime checks and a Monte Carlo rate experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .asymptotics import ConditionResult, MarkovCensor
from .errors import CensacvError, ZeroDenominator


def ratio_estimate(u, v) -> float:
    """``(n^-1 sum u_i v_i) / (n^-1 sum u_i)`` for non-negative ``u``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise CensacvError("u and v must have equal length")
    if np.any(u < 0):
        raise CensacvError("u must be non-negative")
    den = math.fsum(u)
    if den <= 0:
        raise ZeroDenominator("sum of u is zero")
    return math.fsum(u * v) / den


@dataclass(frozen=True)
class RatioMomentConfig:
    p: float
    q: float

    def __post_init__(self):
        if not 0 < self.p < self.q:
            raise CensacvError(f"need 0 < p < q, got p={self.p}, q={self.q}")

    @property
    def r(self) -> float:
        return self.p * self.q / (self.q - self.p)

    @property
    def s(self) -> float:
        return self.p * (self.q + 2) / (self.q - self.p)

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r, "s": self.s}


def moment_config(p: float, q: float) -> RatioMomentConfig:
    return RatioMomentConfig(float(p), float(q))


# --------------------------------------------------------------------------------------
# dependence regimes


@dataclass(frozen=True)
class IID:
    name = "iid"


@dataclass(frozen=True)
class Mixing:
    """Strong mixing with ``alpha_i = O(i^-rate)`` and ``||U_0||_{r_prime} < inf``."""

    rate: float
    r_prime: float
    name = "mixing"


@dataclass(frozen=True)
class CausalGamma:
    rate: float
    name = "causal_gamma"


@dataclass(frozen=True)
class LambdaNC:
    """Non-causal lambda dependence for bounded ``Z_0 = U_0 V_0 - E U_0 V_0``."""

    rate: float
    name = "lambda_nc"


def _is_even_int(x: float) -> bool:
    return float(x).is_integer() and int(x) % 2 == 0 and x >= 2


def ratio_condition(regime, cfg: RatioMomentConfig) -> ConditionResult:
    """Check that the regime's decay rate yields the ``1/sqrt(n)`` moment bounds.

    Ties (rate equal to threshold) fail; the inequalities are strict.
    """
    p, q, r = cfg.p, cfg.q, cfg.r
    if isinstance(regime, IID):
        return ConditionResult(True, 0.0, math.inf)
    if isinstance(regime, Mixing):
        if not regime.r_prime > q:
            raise CensacvError(f"mixing regime needs r' > q, got r'={regime.r_prime}, q={q}")
        threshold = max(p / 2 * r / (r - p), q / 2 * regime.r_prime / (regime.r_prime - p))
    elif isinstance(regime, CausalGamma):
        threshold = max(p / 2 * (r - 1) / (r - p), q / 2)
    elif isinstance(regime, LambdaNC):
        if not (_is_even_int(p) and _is_even_int(q)):
            raise CensacvError(f"lambda regime needs even integers p, q >= 2, got p={p}, q={q}")
        threshold = q / 2
    else:
        raise CensacvError(f"unknown regime {regime!r}")
    return ConditionResult(regime.rate > threshold, threshold, regime.rate - threshold)


# --------------------------------------------------------------------------------------
# generators for (U, V) with known ratio


class RatioGenerator:
    """Stationary ``(U, V)`` pairs with known ``R = E[UV] / E[U]``.

    ``bound`` is a bound on ``|U V - E U V|`` when the pair is bounded.
    """

    name = "generator"
    true_ratio: float = 0.0
    bound: float | None = None

    def sample(self, n: int, rng: np.random.Generator):
        raise NotImplementedError

    def spec(self) -> dict:
        return {"type": self.name}


@dataclass(frozen=True)
class IidShiftedBernoulli(RatioGenerator):
    """``U ~ Bernoulli(1/2) + 1/2``, ``V ~ N(0, 1)`` independent; ``R = 0``."""

    name = "iid"
    true_ratio = 0.0

    def sample(self, n, rng):
        u = (rng.random(n) < 0.5) + 0.5
        v = rng.standard_normal(n)
        return u, v


@dataclass(frozen=True)
class CausalAR1Pairs(RatioGenerator):
    """Lag-``lag`` products of a Gaussian AR(1) and a 0/1 Markov chain.

    ``U_i = C_i C_{i+lag}`` and ``V_i = X_i X_{i+lag}``, so ``R = gamma_X(lag)``.
    """

    phi: float = 0.5
    lag: int = 1
    p01: float = 0.2
    p10: float = 0.3
    burnin: int = 1000
    name = "causal_ar1"

    @property
    def true_ratio(self):
        return self.phi**self.lag / (1 - self.phi**2)

    def sample(self, n, rng):
        from scipy.signal import lfilter

        eps = rng.standard_normal(n + self.lag + self.burnin)
        x = lfilter([1.0], [1.0, -self.phi], eps)[self.burnin:]
        c = MarkovCensor(self.p01, self.p10).sample(n + self.lag, rng)
        return c[:n] * c[self.lag:], x[:n] * x[self.lag:]

    def spec(self):
        return {"type": self.name, "phi": self.phi, "lag": self.lag, "p01": self.p01, "p10": self.p10}


@dataclass(frozen=True)
class NonCausalBounded(RatioGenerator):
    """Two-sided moving average of uniform noise, bounded.

    ``W_t = sum_{|j|<=J} rho^|j| e_{t-j}`` with ``e ~ U(-1, 1)``;
    ``U = 1 + cos(W)/2`` and ``V = W``. ``W`` is symmetric so ``R = 0``.
    """

    rho: float = 0.6
    half_width: int = 20
    name = "noncausal_bounded"
    true_ratio = 0.0

    @property
    def weights(self) -> np.ndarray:
        j = np.arange(-self.half_width, self.half_width + 1)
        return self.rho ** np.abs(j)

    @property
    def bound(self):
        w_max = float(self.weights.sum())
        return 2 * 1.5 * w_max  # |UV| <= 1.5 w_max, and so is |E UV|

    def sample(self, n, rng):
        e = rng.uniform(-1.0, 1.0, n + 2 * self.half_width)
        w = np.convolve(e, self.weights, mode="valid")
        return 1.0 + 0.5 * np.cos(w), w

    def spec(self):
        return {"type": self.name, "rho": self.rho, "half_width": self.half_width}


@dataclass(frozen=True)
class ConstantV(RatioGenerator):
    """``V`` identically ``k``: the ratio is exact for every sample."""

    k: float = 1.0
    name = "constant_v"

    @property
    def true_ratio(self):
        return self.k

    def sample(self, n, rng):
        return (rng.random(n) < 0.5) + 0.5, np.full(n, self.k)

    def spec(self):
        return {"type": self.name, "k": self.k}


# --------------------------------------------------------------------------------------
# rate experiment


@dataclass
class RateReport:
    generator: dict
    p: float
    n_grid: list
    replicates: int
    seed: int
    true_ratio: float
    errors: list
    slope: float
    intercept: float
    regime_check: dict | None = None
    slope_band: tuple = (-0.6, -0.4)
    extra: dict = field(default_factory=dict)

    @property
    def slope_in_band(self) -> bool:
        lo, hi = self.slope_band
        return bool(lo <= self.slope <= hi)

    def to_dict(self) -> dict:
        return {
            "experiment": "ratio_rate",
            "generator": self.generator,
            "p": self.p,
            "n_grid": self.n_grid,
            "replicates": self.replicates,
            "seed": self.seed,
            "true_ratio": self.true_ratio,
            "lp_errors": self.errors,
            "slope": None if math.isnan(self.slope) else self.slope,
            "intercept": None if math.isnan(self.intercept) else self.intercept,
            "slope_band": list(self.slope_band),
            "pass": self.slope_in_band,
            "regime_check": self.regime_check,
        }


def loglog_slope(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log y`` on ``log x``; ``nan`` if any ``y <= 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        return math.nan, math.nan
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def rate_experiment(generator: RatioGenerator, p: float, n_grid, replicates: int, seed: int,
                    regime=None, cfg: RatioMomentConfig | None = None, threads: int | None = 1) -> RateReport:
    """Estimate ``||R_hat_n - R||_p`` on ``n_grid`` and fit the log-log slope.

    Each replicate draws one path of length ``max(n_grid)`` from its own stream
    and evaluates the estimator on its prefixes.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if len(n_grid) < 4:
        raise CensacvError("n-grid needs at least 4 points")
    if replicates < 1:
        raise CensacvError("need at least one replicate")
    if isinstance(regime, LambdaNC) and generator.bound is None:
        raise CensacvError("lambda regime needs a bounded generator")
    check = None
    if regime is not None:
        check = {"regime": regime.name, **ratio_condition(regime, cfg or moment_config(p, 2 * p)).to_dict()}
    n_max = n_grid[-1]
    idx = np.array(n_grid) - 1
    R = generator.true_ratio

    def work(start, stop):
        out = np.empty((stop - start, len(n_grid)))
        for j, rep in enumerate(range(start, stop)):
            u, v = generator.sample(n_max, streams.stream(seed, streams.AUX, rep))
            ratio = np.cumsum(u * v)[idx] / np.cumsum(u)[idx]
            out[j] = np.abs(ratio - R) ** p
        return out

    abs_p = np.concatenate(streams.chunked_map(work, replicates, threads))
    errors = abs_p.mean(axis=0) ** (1 / p)
    slope, intercept = loglog_slope(n_grid, errors)
    return RateReport(generator.spec(), float(p), n_grid, int(replicates), int(seed), float(R),
                      [float(e) for e in errors], slope, intercept, check)
