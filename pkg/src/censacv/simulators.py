"""Seeded simulation of contracting Markov processes and censoring weights.

All latent models are recursions ``X_t = f(X_{t-1}, eps_t)`` started at
``X = 0`` and run through a burn-in. With a contraction constant ``c < 1``
they are theta-weakly dependent with a geometric bound, see
:func:`theta_bound`.

Fixed function families (Lipschitz constants hold by construction):

* ``NPAR``:   ``X_t = c sin(X_{t-1}) + eps_t``
* ``ARCH``:   ``X_t = (s0 + c |X_{t-1}|) eps_t``, with ``E eps^2 = 1``
* ``ARARCH``: ``X_t = c_r sin(X_{t-1}) + (s0 + c_s |X_{t-1}|) eps_t``
* ``Bilinear``: ``X_t = a X_{t-1} + b X_{t-1} eps_{t-1} + eps_t``
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats
from scipy.signal import lfilter

from . import streams
from .asymptotics import AcvModel, CensorModel, DecayKind, DependenceDecay, ar1_acv
from .errors import CensacvError, NonStationary

DEFAULT_BURNIN = 1000

# --------------------------------------------------------------------------------------
# innovations


class Innovation:
    name = "innovation"

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    mean: float
    mean_abs: float
    second_moment: float
    fourth_moment: float

    def abs_affine_mean(self, a: float, b: float) -> float:
        """``E|a + b eps|`` by quadrature over the density."""
        raise NotImplementedError

    def spec(self) -> dict:
        return {"type": self.name, **self.__dict__}


@dataclass(frozen=True)
class Gaussian(Innovation):
    sigma: float = 1.0
    name = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise CensacvError("gaussian sigma must be positive")

    def sample(self, rng, size):
        return self.sigma * rng.standard_normal(size)

    @property
    def mean(self):
        return 0.0

    @property
    def mean_abs(self):
        return self.sigma * math.sqrt(2 / math.pi)

    @property
    def second_moment(self):
        return self.sigma**2

    @property
    def fourth_moment(self):
        return 3 * self.sigma**4

    def abs_affine_mean(self, a, b):
        # folded normal mean for a + b*eps ~ N(a, (b sigma)^2)
        tau = abs(b) * self.sigma
        if tau == 0:
            return abs(a)
        return tau * math.sqrt(2 / math.pi) * math.exp(-(a**2) / (2 * tau**2)) + a * (1 - 2 * stats.norm.cdf(-a / tau))


@dataclass(frozen=True)
class Uniform(Innovation):
    a: float = -1.0
    b: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not self.b > self.a:
            raise CensacvError("uniform innovation needs a < b")

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)

    @property
    def mean(self):
        return (self.a + self.b) / 2

    @property
    def mean_abs(self):
        a, b = self.a, self.b
        if a >= 0:
            return self.mean
        if b <= 0:
            return -self.mean
        return (a * a + b * b) / (2 * (b - a))

    @property
    def second_moment(self):
        a, b = self.a, self.b
        return (a * a + a * b + b * b) / 3

    @property
    def fourth_moment(self):
        a, b = self.a, self.b
        return (b**5 - a**5) / (5 * (b - a))

    def abs_affine_mean(self, a, b):
        lo, hi = self.a, self.b
        pts = [-a / b] if b != 0 and lo < -a / b < hi else None
        val, _ = integrate.quad(lambda e: abs(a + b * e), lo, hi, points=pts)
        return val / (hi - lo)


@dataclass(frozen=True)
class Bernoulli(Innovation):
    """0/1 innovations with ``P(eps = 1) = s``."""

    s: float = 0.5
    name = "bernoulli"

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise CensacvError("bernoulli innovation needs 0 < s < 1")

    def sample(self, rng, size):
        return (rng.random(size) < self.s).astype(float)

    @property
    def mean(self):
        return self.s

    mean_abs = mean
    second_moment = mean
    fourth_moment = mean

    def abs_affine_mean(self, a, b):
        return self.s * abs(a + b) + (1 - self.s) * abs(a)


@dataclass(frozen=True)
class Rademacher(Innovation):
    name = "rademacher"

    def sample(self, rng, size):
        return np.where(rng.random(size) < 0.5, -1.0, 1.0)

    mean = 0.0
    mean_abs = 1.0
    second_moment = 1.0
    fourth_moment = 1.0

    def abs_affine_mean(self, a, b):
        return 0.5 * (abs(a + b) + abs(a - b))


# --------------------------------------------------------------------------------------
# latent process models


@dataclass(frozen=True)
class ProcessModel:
    """Base class. ``mean_abs`` optionally pins ``E|X_0|`` for the theta bound."""

    def contraction(self) -> float:
        raise NotImplementedError

    def check_stationary(self) -> None:
        raise NotImplementedError

    def _advance(self, x, eps, t):
        raise NotImplementedError

    def run(self, eps: np.ndarray) -> np.ndarray:
        """Run the recursion from ``X = 0`` over innovation rows ``eps`` (shape ``(R, T)``)."""
        out = np.empty_like(eps)
        x = np.zeros(eps.shape[0])
        for t in range(eps.shape[1]):
            x = self._advance(x, eps, t)
            out[:, t] = x
        return out

    def spec(self) -> dict:
        d = {"type": self.name}
        for k, v in self.__dict__.items():
            d[k] = v.spec() if isinstance(v, Innovation) else v
        return d


@dataclass(frozen=True)
class AR1(ProcessModel):
    phi: float = 0.5
    innovation: Innovation = Gaussian()
    mean_abs: float | None = None
    name = "ar1"

    def contraction(self):
        return abs(self.phi)

    def check_stationary(self):
        if not abs(self.phi) < 1:
            raise NonStationary(f"AR(1) needs |phi| < 1, got {self.phi}")

    def run(self, eps):
        return lfilter([1.0], [1.0, -self.phi], eps, axis=-1)


@dataclass(frozen=True)
class NPAR(ProcessModel):
    c: float = 0.5
    innovation: Innovation = Gaussian()
    mean_abs: float | None = None
    name = "npar"

    def contraction(self):
        return self.c

    def check_stationary(self):
        if not 0 <= self.c < 1:
            raise NonStationary(f"nonparametric AR needs 0 <= c < 1, got {self.c}")

    def _advance(self, x, eps, t):
        return self.c * np.sin(x) + eps[:, t]


@dataclass(frozen=True)
class ARCH(ProcessModel):
    c: float = 0.5
    s0: float = 1.0
    innovation: Innovation = Gaussian()
    mean_abs: float | None = None
    name = "arch"

    def contraction(self):
        return self.c

    def check_stationary(self):
        if not 0 <= self.c < 1:
            raise NonStationary(f"ARCH needs 0 <= c < 1, got {self.c}")
        if not self.s0 > 0:
            raise CensacvError("ARCH needs s0 > 0")
        if not math.isclose(self.innovation.second_moment, 1.0, rel_tol=1e-12):
            raise CensacvError("ARCH innovations must have E eps^2 = 1")

    def _advance(self, x, eps, t):
        return (self.s0 + self.c * np.abs(x)) * eps[:, t]


@dataclass(frozen=True)
class ARARCH(ProcessModel):
    c_r: float = 0.3
    c_s: float = 0.3
    s0: float = 1.0
    innovation: Innovation = Gaussian()
    mean_abs: float | None = None
    name = "ararch"

    def contraction(self):
        return self.c_r + self.c_s

    def check_stationary(self):
        if self.c_r < 0 or self.c_s < 0 or not self.c_r + self.c_s < 1:
            raise NonStationary(f"AR-ARCH needs c_r + c_s < 1, got {self.c_r} + {self.c_s}")
        if not self.s0 > 0:
            raise CensacvError("AR-ARCH needs s0 > 0")
        if not math.isclose(self.innovation.second_moment, 1.0, rel_tol=1e-12):
            raise CensacvError("AR-ARCH innovations must have E eps^2 = 1")

    def _advance(self, x, eps, t):
        return self.c_r * np.sin(x) + (self.s0 + self.c_s * np.abs(x)) * eps[:, t]


@dataclass(frozen=True)
class Bilinear(ProcessModel):
    a: float = 0.3
    b: float = 0.3
    innovation: Innovation = Gaussian()
    mean_abs: float | None = None
    name = "bilinear"

    def contraction(self):
        return self.innovation.abs_affine_mean(self.a, self.b)

    def check_stationary(self):
        c = self.contraction()
        if not c < 1:
            raise NonStationary(f"bilinear model needs E|a + b eps| < 1, got {c:.6g}")

    def _advance(self, x, eps, t):
        prev = eps[:, t - 1] if t > 0 else 0.0
        return self.a * x + self.b * x * prev + eps[:, t]


def simulate_batch(model: ProcessModel, n: int, seed: int, replicates, burnin: int = DEFAULT_BURNIN) -> np.ndarray:
    """Latent paths for the given replicate indices, shape ``(len(replicates), n)``.

    Row ``j`` is identical to ``simulate(model, n, seed, burnin, replicates[j])``.
    """
    model.check_stationary()
    n, burnin = int(n), int(burnin)
    if n < 1 or burnin < 0:
        raise CensacvError("need n >= 1 and burnin >= 0")
    replicates = list(replicates)
    eps = np.empty((len(replicates), n + burnin))
    for j, r in enumerate(replicates):
        eps[j] = model.innovation.sample(streams.stream(seed, streams.LATENT, r), n + burnin)
    x = model.run(eps)[:, burnin:]
    if not np.all(np.isfinite(x)):
        raise NonStationary("simulation produced non-finite values")
    return np.ascontiguousarray(x)


def simulate(model: ProcessModel, n: int, seed: int, burnin: int = DEFAULT_BURNIN, replicate: int = 0) -> np.ndarray:
    """One latent path of length ``n`` after ``burnin`` discarded steps."""
    return simulate_batch(model, n, seed, [replicate], burnin)[0]


def simulate_censor(model: CensorModel, n: int, seed: int, replicate: int = 0) -> np.ndarray:
    return model.sample(int(n), streams.stream(seed, streams.CENSOR, replicate))


def simulate_censor_batch(model: CensorModel, n: int, seed: int, replicates) -> np.ndarray:
    return np.stack([simulate_censor(model, n, seed, r) for r in replicates])


# --------------------------------------------------------------------------------------
# analytic summaries

MEAN_ABS_SEED = 0x5EED
MEAN_ABS_LENGTH = 200_000


@functools.lru_cache(maxsize=64)
def mean_abs(model: ProcessModel) -> float:
    """``E|X_0|``: configured, analytic for Gaussian AR(1), else one long simulation."""
    if model.mean_abs is not None:
        return float(model.mean_abs)
    if isinstance(model, AR1) and isinstance(model.innovation, Gaussian):
        return model.innovation.sigma * math.sqrt(2 / math.pi) / math.sqrt(1 - model.phi**2)
    path = simulate(model, MEAN_ABS_LENGTH, MEAN_ABS_SEED, replicate=0)
    return float(np.mean(np.abs(path)))


def theta_bound(model: ProcessModel, r: int) -> float:
    """Geometric theta-dependence bound at gap ``r``.

    ``c^r E|X_0|`` for the Markov recursions and ``c^r (r+1)/(1-c)`` for the
    bilinear model, with ``c`` the contraction constant.
    """
    model.check_stationary()
    r = int(r)
    if r < 0:
        raise CensacvError("gap r must be non-negative")
    c = model.contraction()
    if isinstance(model, Bilinear):
        return c**r * (r + 1) / (1 - c)
    return c**r * mean_abs(model)


def theta_decay(model: ProcessModel) -> DependenceDecay:
    return DependenceDecay(DecayKind.THETA, math.inf, theta_bound(model, 1),
                           sequence=lambda r: theta_bound(model, r))


def analytic_gamma(model: ProcessModel) -> AcvModel | None:
    """Exact autocovariance for Gaussian AR(1); ``None`` for every other model."""
    if isinstance(model, AR1) and isinstance(model.innovation, Gaussian):
        return ar1_acv(model.phi, model.innovation.sigma)
    return None
