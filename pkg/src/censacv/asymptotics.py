"""Asymptotic variance of the Parzen estimator and weak-dependence bookkeeping.

Variance
--------
With ``Z_k = C_k C_{k+l} (X_k X_{k+l} - gamma(l))`` and ``C`` independent of
``X``, the long-run variance ``sum_k E[Z_0 Z_k]`` expands through the fourth
cumulant into

    sigma2(l) = sum_k m(l, k, k+l) [kappa4(l, k, k+l) + gamma(k)^2 + gamma(k+l) gamma(k-l)]

where ``m(a, b, c) = E[C_0 C_a C_b C_c]``. Under full observation this is the
classical Bartlett expression. The cross-lag entries follow the same expansion.

Dependence coefficients
-----------------------
:class:`DependenceDecay` carries a power-law bound ``constant * r**-rate`` (or
an explicit sequence) for one coefficient family. The condition checkers
compare the rate against the thresholds required by the limit theorems.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CensacvError, NonSummableWarning

# --------------------------------------------------------------------------------------
# censoring models


class CensorModel:
    """Stationary modulating process with closed-form joint moments.

    Subclasses implement :meth:`joint_moment` for an arbitrary index multiset
    and :meth:`sample`.
    """

    name = "censor"

    def joint_moment(self, indices: Sequence[int]) -> float:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def nu(self, lag: int) -> float:
        """``E[C_0 C_lag]``."""
        return self.joint_moment((0, int(lag)))

    def m4(self, a: int, b: int, c: int) -> float:
        """``E[C_0 C_a C_b C_c]``; negative indices allowed."""
        return self.joint_moment((0, int(a), int(b), int(c)))

    @property
    def marginal(self) -> float:
        return self.joint_moment((0,))

    def spec(self) -> dict:
        return {"type": self.name, **self.params()}


@dataclass(frozen=True)
class ConstantCensor(CensorModel):
    kappa: float = 1.0
    name = "constant"

    def __post_init__(self):
        if not 0 < self.kappa <= 1:
            raise CensacvError(f"constant modulation must be in (0, 1], got {self.kappa}")

    def joint_moment(self, indices):
        return self.kappa ** len(indices)

    def sample(self, n, rng):
        return np.full(int(n), float(self.kappa))

    def params(self):
        return {"kappa": self.kappa}


@dataclass(frozen=True)
class BernoulliCensor(CensorModel):
    """I.i.d. 0/1 observation indicators with ``P(C=1) = p``."""

    p: float = 0.5
    name = "bernoulli"

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise CensacvError(f"observation probability must be in (0, 1], got {self.p}")

    def joint_moment(self, indices):
        return self.p ** len(set(int(i) for i in indices))

    def sample(self, n, rng):
        return (rng.random(int(n)) < self.p).astype(float)

    def params(self):
        return {"p": self.p}


@dataclass(frozen=True)
class MarkovCensor(CensorModel):
    """Two-state 0/1 Markov chain started from its stationary law.

    ``p01`` is the probability of switching 0 -> 1, ``p10`` of 1 -> 0.
    """

    p01: float = 0.2
    p10: float = 0.3
    name = "markov"

    def __post_init__(self):
        for v in (self.p01, self.p10):
            if not 0 < v < 1:
                raise CensacvError(f"transition probabilities must be in (0, 1), got {v}")

    @property
    def stationary_one(self) -> float:
        return self.p01 / (self.p01 + self.p10)

    def _stay_on(self, gap: int) -> float:
        # P(C_{t+gap} = 1 | C_t = 1), from the spectral form of P**gap
        pi1 = self.stationary_one
        return pi1 + (1.0 - pi1) * (1.0 - self.p01 - self.p10) ** gap

    def joint_moment(self, indices):
        pts = sorted(set(int(i) for i in indices))
        value = self.stationary_one
        for a, b in zip(pts, pts[1:]):
            value *= self._stay_on(b - a)
        return value

    def sample(self, n, rng):
        n = int(n)
        u = rng.random(n)
        out = np.empty(n)
        state = 1.0 if u[0] < self.stationary_one else 0.0
        out[0] = state
        for t in range(1, n):
            if state == 1.0:
                state = 0.0 if u[t] < self.p10 else 1.0
            else:
                state = 1.0 if u[t] < self.p01 else 0.0
            out[t] = state
        return out

    def params(self):
        return {"p01": self.p01, "p10": self.p10}


@dataclass(frozen=True)
class PeriodicCensor(CensorModel):
    """Deterministic periodic weight pattern with a uniformly random phase."""

    pattern: tuple = (1.0, 0.0)
    name = "periodic"

    def __post_init__(self):
        pat = tuple(float(v) for v in self.pattern)
        if not pat or any(not 0 <= v <= 1 for v in pat):
            raise CensacvError("periodic pattern must be a non-empty sequence in [0, 1]")
        if not any(pat):
            raise CensacvError("periodic pattern must contain a non-zero weight")
        object.__setattr__(self, "pattern", pat)

    def joint_moment(self, indices):
        period = len(self.pattern)
        idx = [int(i) for i in indices]
        # sorted factors keep the product independent of index order
        terms = [math.prod(sorted(self.pattern[(phase + i) % period] for i in idx)) for phase in range(period)]
        return math.fsum(terms) / period

    def sample(self, n, rng):
        period = len(self.pattern)
        phase = int(rng.integers(period))
        return np.array([self.pattern[(phase + t) % period] for t in range(int(n))])

    def params(self):
        return {"pattern": list(self.pattern)}


# --------------------------------------------------------------------------------------
# second and fourth order structure of the latent process


def _zero_cumulant(i, j, k):
    return 0.0


@dataclass(frozen=True)
class AcvModel:
    """Autocovariance ``gamma(k)`` and fourth cumulant ``kappa4(i, j, k)``."""

    gamma: Callable[[int], float]
    kappa4: Callable[[int, int, int], float] = _zero_cumulant
    label: str = ""

    def default_truncation(self, rel_tol: float = 1e-12, cap: int = 10_000) -> int:
        """Smallest ``K`` with ``|gamma(K)| < rel_tol * gamma(0)``, capped."""
        g0 = abs(self.gamma(0))
        for k in range(1, cap + 1):
            if abs(self.gamma(k)) < rel_tol * g0:
                return k
        return cap


def ar1_acv(phi: float, sigma: float = 1.0) -> AcvModel:
    """Gaussian AR(1): ``gamma(k) = sigma^2 phi^|k| / (1 - phi^2)``, zero cumulant."""
    if not abs(phi) < 1:
        raise CensacvError(f"AR(1) needs |phi| < 1, got {phi}")
    var = sigma**2 / (1.0 - phi**2)
    return AcvModel(lambda k: var * phi ** abs(int(k)), label=f"ar1(phi={phi}, sigma={sigma})")


def white_noise_acv(variance: float = 1.0) -> AcvModel:
    return AcvModel(lambda k: variance if int(k) == 0 else 0.0, label=f"white_noise({variance})")


# --------------------------------------------------------------------------------------
# asymptotic variance


@dataclass(frozen=True)
class VarianceDiagnostics:
    value: float
    truncation: int
    last_shell: float
    summable: bool
    literal_value: float | None = None


def _cross_term(acv: AcvModel, censor: CensorModel, li: int, lj: int, k: int) -> float:
    g = acv.gamma
    weight = censor.m4(li, k, k + lj)
    if weight == 0:
        return 0.0
    return weight * (acv.kappa4(li, k, k + lj) + g(k) * g(k + lj - li) + g(k + lj) * g(k - li))


def _literal_term(acv: AcvModel, censor: CensorModel, lag: int, k: int) -> float:
    g = acv.gamma
    return censor.m4(lag, k, k + lag) * (acv.kappa4(lag, k, k + lag) + g(k + lag) * g(k - lag) - g(lag) ** 2)


def _resolve_truncation(acv: AcvModel, lags, truncation) -> int:
    if truncation is None:
        return acv.default_truncation() + max(lags)
    truncation = int(truncation)
    if truncation < 1:
        raise CensacvError("truncation K must be >= 1")
    return truncation


def _shell_sum(term, truncation: int, tol: float):
    values = [term(k) for k in range(-truncation, truncation + 1)]
    total = math.fsum(values)
    last_shell = abs(values[0]) + abs(values[-1])
    summable = last_shell <= tol * max(1.0, abs(total))
    return total, last_shell, summable


def sigma2_diagnostics(acv: AcvModel, censor: CensorModel, lag: int, truncation: int | None = None,
                       tol: float = 1e-8, literal: bool = False) -> VarianceDiagnostics:
    """Truncated asymptotic variance with its last-shell diagnostic.

    With ``literal=True`` the sum with the ``-gamma(l)^2`` sign pattern is
    evaluated over the same window for comparison; it is not summable unless
    ``gamma(l) = 0`` or the censor moments vanish.
    """
    lag = int(lag)
    if lag < 0:
        raise CensacvError("lag must be non-negative")
    K = _resolve_truncation(acv, [lag], truncation)
    value, last_shell, summable = _shell_sum(lambda k: _cross_term(acv, censor, lag, lag, k), K, tol)
    if not summable:
        warnings.warn(f"sigma2 at lag {lag}: last shell {last_shell:.3g} exceeds tolerance (K={K})",
                      NonSummableWarning, stacklevel=2)
    lit = None
    if literal:
        lit = math.fsum(_literal_term(acv, censor, lag, k) for k in range(-K, K + 1))
    return VarianceDiagnostics(value, K, last_shell, summable, lit)


def sigma2(acv: AcvModel, censor: CensorModel, lag: int, truncation: int | None = None) -> float:
    """Asymptotic variance of ``sqrt(N) nu(l) (gamma_tilde(l) - gamma(l))``."""
    return sigma2_diagnostics(acv, censor, lag, truncation).value


def sigma_matrix(acv: AcvModel, censor: CensorModel, lags: Sequence[int], truncation: int | None = None) -> np.ndarray:
    """Joint asymptotic covariance for increasing lags ``l_1 < ... < l_k``."""
    lags = [int(v) for v in lags]
    if not lags or any(b <= a for a, b in zip(lags, lags[1:])) or lags[0] < 0:
        raise CensacvError("lags must be non-negative and strictly increasing")
    K = _resolve_truncation(acv, lags, truncation)
    out = np.empty((len(lags), len(lags)))
    for i, li in enumerate(lags):
        for j, lj in enumerate(lags):
            if j < i:
                out[i, j] = out[j, i]
                continue
            out[i, j] = math.fsum(_cross_term(acv, censor, li, lj, k) for k in range(-K, K + 1))
    return out


# --------------------------------------------------------------------------------------
# dependence coefficients


class DecayKind(str, enum.Enum):
    THETA = "theta"
    KAPPA = "kappa"
    LAMBDA = "lambda"
    ALPHA = "alpha"
    CAUSAL_GAMMA = "causal_gamma"


@dataclass(frozen=True)
class DependenceDecay:
    """Bound ``eps(r) <= constant * r**-rate`` for one coefficient family.

    ``sequence``, when given, is an exact bound ``r -> eps(r)`` that takes
    precedence over the power law (geometric model bounds use ``rate=inf``).
    """

    kind: DecayKind
    rate: float
    constant: float = 1.0
    sequence: Callable[[int], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", DecayKind(self.kind))
        if not self.rate > 0:
            raise CensacvError(f"decay rate must be positive, got {self.rate}")
        if self.constant < 0:
            raise CensacvError("decay constant must be non-negative")

    def bound(self, r: int) -> float:
        if self.sequence is not None:
            return float(self.sequence(int(r)))
        if self.constant == 0:
            return 0.0
        return self.constant * max(int(r), 1) ** -self.rate


def compose_independent(du: DependenceDecay, dv: DependenceDecay) -> DependenceDecay:
    """Bound for the pair process ``(U_i, V_i)`` of two independent processes.

    Coefficients add. For ``r >= 1`` the sum of two power laws is bounded by
    the slower one with the constants summed.
    """
    if du.kind != dv.kind:
        raise CensacvError(f"cannot compose {du.kind.value} with {dv.kind.value}")
    if du.constant == 0 and du.sequence is None:
        return dv
    if dv.constant == 0 and dv.sequence is None:
        return du
    seq = None
    if du.sequence is not None or dv.sequence is not None:
        seq = lambda r: du.bound(r) + dv.bound(r)  # noqa: E731
    return DependenceDecay(du.kind, min(du.rate, dv.rate), du.constant + dv.constant, seq)


def heredity_exponent(kind: DecayKind | str, m: float, a: float) -> float:
    kind = DecayKind(kind)
    if not 1 <= a < m:
        raise CensacvError(f"heredity needs 1 <= a < m, got a={a}, m={m}")
    if kind is DecayKind.THETA:
        return (m - a) / (m - 1)
    if kind in (DecayKind.KAPPA, DecayKind.LAMBDA):
        return (m - a) / (m + a - 2)
    if kind is DecayKind.ALPHA:
        return 1.0
    raise CensacvError(f"no heredity rule for {kind.value} coefficients")


def heredity_transform(d: DependenceDecay, m: float, a: float) -> DependenceDecay:
    """Decay of ``h(U_n)`` for ``h`` with polynomial growth of order ``a``.

    ``m`` is the moment order bounding ``U``. Strong mixing is inherited by any
    measurable image, so alpha decays pass through unchanged.
    """
    e = heredity_exponent(d.kind, m, a)
    seq = None
    if d.sequence is not None:
        seq = lambda r: d.bound(r) ** e  # noqa: E731
    return DependenceDecay(d.kind, d.rate * e, d.constant**e, seq)


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    threshold: float
    margin: float

    def to_dict(self) -> dict:
        return {"pass": self.passed, "threshold": self.threshold, "margin": self.margin}


def clt_threshold(kind: DecayKind | str, m: float) -> float:
    """Minimal power-law rate for the autocovariance CLT with ``E|X|^m < inf``."""
    kind = DecayKind(kind)
    if not m > 4:
        raise CensacvError(f"the CLT conditions need m > 4, got {m}")
    if kind is DecayKind.THETA:
        return (m - 1) / (m - 2) * (1 + 1 / (m - 2))
    if kind is DecayKind.KAPPA:
        return m / (m - 2) * (2 + 1 / (m - 2))
    if kind is DecayKind.LAMBDA:
        return m / (m - 2) * (4 + 1 / (m - 2))
    if kind is DecayKind.ALPHA:
        # sum_i i^{1/(m-4)} i^{-rate} < inf
        return 1 + 1 / (m - 4)
    raise CensacvError(f"no CLT condition for {kind.value} coefficients")


def clt_condition(kind: DecayKind | str, rate: float, m: float) -> ConditionResult:
    threshold = clt_threshold(kind, m)
    return ConditionResult(rate > threshold, threshold, rate - threshold)


def tail_summable(term: Callable[[int], float], max_blocks: int = 16, ratio_tol: float = 1e-3) -> bool:
    """Heuristic convergence test for ``sum_{i>=1} term(i)`` with non-negative terms.

    Sums dyadic blocks ``[2^j, 2^{j+1})``. The series counts as summable once a
    block is negligible against the largest one, or when the last two block
    ratios both stay below ``1 - ratio_tol``.
    """
    blocks: list[float] = []
    for j in range(max_blocks):
        block = math.fsum(term(i) for i in range(2**j, 2 ** (j + 1)))
        blocks.append(block)
        if block <= 1e-15 * max(blocks):
            return True
    r1, r2 = blocks[-2] / blocks[-3], blocks[-1] / blocks[-2]
    return r1 < 1 - ratio_tol and r2 < 1 - ratio_tol


def clt_condition_decay(decay: DependenceDecay, m: float) -> ConditionResult:
    """CLT condition for a decay object.

    Power laws compare rates. Explicit sequences are checked through
    summability of ``i**(threshold - 1) * eps(i)``, which for a power law is
    equivalent to ``rate > threshold``.
    """
    threshold = clt_threshold(decay.kind, m)
    if decay.sequence is None:
        return clt_condition(decay.kind, decay.rate, m)
    ok = tail_summable(lambda i: i ** (threshold - 1) * decay.bound(i))
    return ConditionResult(ok, threshold, math.inf if ok else -math.inf)


@dataclass(frozen=True)
class SllnResult:
    passed: bool
    delta: float | None
    exponent_margin: float | None

    def to_dict(self) -> dict:
        return {"pass": self.passed, "delta": self.delta, "exponent_margin": self.exponent_margin}


def slln_exponent_margin(rate: float, r: float, delta: float) -> float:
    """``rate * delta/(delta+1) - (r(delta-1)+1)/(r-(1+delta)) - 1``; positive means summable."""
    if not delta > 0 or not r > 1 + delta:
        raise CensacvError(f"need delta > 0 and r > 1 + delta, got delta={delta}, r={r}")
    return rate * delta / (delta + 1) - (r * (delta - 1) + 1) / (r - (1 + delta)) - 1


def slln_condition(rate: float, r: float, deltas: Sequence[float] | None = None,
                   constant: float = 1.0) -> SllnResult:
    """Search ``delta`` for the theta summability condition of the strong law.

    ``r`` is the moment order with ``||X_0||_r < inf``. Grid points with
    ``r <= 1 + delta`` are skipped.
    """
    if deltas is None:
        deltas = np.round(np.linspace(0.1, 2.0, 20), 10)
        deltas = [d for d in deltas if r > 1 + d]
        if not deltas:
            raise CensacvError(f"moment order r={r} leaves no admissible delta in the default grid")
    if constant == 0:
        return SllnResult(True, float(deltas[0]), None)
    for delta in deltas:
        margin = slln_exponent_margin(rate, r, float(delta))
        if margin > 0:
            return SllnResult(True, float(delta), margin)
    return SllnResult(False, None, None)
