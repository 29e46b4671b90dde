"""Seeded Monte Carlo checks of the limit theorems for the Parzen estimator.

Experiments
-----------
``clt``       variance, normality and coverage of ``sqrt(N) nu_hat(l) (gamma_tilde(l) - gamma(l))``,
              plus the joint covariance over a lag set
``slln``      running sup-error of ``gamma_tilde_n(l)`` along single long trajectories
``ratio``     L^p rate of the ratio-of-means estimator
``spectral``  dual-norm convergence of the integrated functional

Every experiment is a pure function of its resolved config. Reports are plain
dicts written as JSON with sorted keys, so reruns are byte-identical.
"""
from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import config as cfgmod
from . import streams
from .asymptotics import (BernoulliCensor, CensorModel, ConstantCensor, DecayKind, DependenceDecay,
                          MarkovCensor, clt_condition_decay, compose_independent, sigma2_diagnostics,
                          sigma_matrix)
from .errors import CensacvError, ConfigError, Unavailable
from .estimators import MeanMode, parzen_acv_batch
from .ratio import moment_config, rate_experiment
from .simulators import (DEFAULT_BURNIN, ProcessModel, analytic_gamma, simulate_batch,
                         simulate_censor_batch, theta_decay)
from .spectral import SpectralFunctional, spectral_convergence_experiment

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
Z975 = float(stats.norm.ppf(0.975))


def censor_theta_decay(censor: CensorModel) -> DependenceDecay | None:
    """Theta bound for the censoring process, ``None`` if it does not decay."""
    if isinstance(censor, (ConstantCensor, BernoulliCensor)):
        return DependenceDecay(DecayKind.THETA, math.inf, 0.0, sequence=lambda r: 0.0 if r >= 1 else 1.0)
    if isinstance(censor, MarkovCensor):
        lam = abs(1 - censor.p01 - censor.p10)
        return DependenceDecay(DecayKind.THETA, math.inf, lam, sequence=lambda r: lam**r)
    return None


def condition_check(process: ProcessModel, censor: CensorModel, moment: float) -> dict:
    """Theta-CLT condition for the pair ``(X_i, C_i)`` with ``E|X|^moment < inf``."""
    cdecay = censor_theta_decay(censor)
    if cdecay is None:
        return {"pass": None, "note": f"no decay bound for {censor.name} censoring"}
    joint = compose_independent(theta_decay(process), cdecay)
    return {"moment": moment, **clt_condition_decay(joint, moment).to_dict()}


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _jsonable(x.item())
    return x


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------------------
# CLT


@dataclass
class MonteCarloReport:
    experiment: str
    config: dict
    per_lag: list
    joint: dict | None
    condition: dict
    checks: dict
    wall_clock: float = field(default=0.0, compare=False)
    statistics: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return all(v for v in self.checks.values() if v is not None)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "per_lag": self.per_lag,
                "joint": self.joint, "condition": self.condition, "checks": self.checks, "pass": self.passed}


def clt_statistics(process: ProcessModel, censor: CensorModel, lags, n: int, replicates: int, seed: int,
                   mode=MeanMode.NONE, burnin: int = DEFAULT_BURNIN, threads: int | None = 1):
    """Standardisable statistics for each replicate and lag.

    Returns ``(T_hat, T_nu)`` of shape ``(replicates, len(lags))`` using the
    empirical ``nu_hat`` and the model ``nu`` respectively.
    """
    acv = analytic_gamma(process)
    if acv is None:
        raise Unavailable(f"no analytic autocovariance for {process.name}; the centring needs gamma exactly")
    gam = np.array([acv.gamma(lag) for lag in lags])
    nu = np.array([censor.nu(lag) for lag in lags])
    root_n = math.sqrt(n)

    def work(start, stop):
        reps = range(start, stop)
        x = simulate_batch(process, n, seed, reps, burnin)
        c = simulate_censor_batch(censor, n, seed, reps)
        y = c * x
        est = [parzen_acv_batch(y, c, lag, mode) for lag in lags]
        g_t = np.column_stack([e[0] for e in est])
        nu_h = np.column_stack([e[1] for e in est])
        return np.stack([root_n * nu_h * (g_t - gam), root_n * nu * (g_t - gam)])

    parts = streams.chunked_map(work, replicates, threads)
    both = np.concatenate(parts, axis=1)
    if np.any(np.isnan(both)):
        raise CensacvError("some replicates had no co-observed pairs; increase n")
    return both[0], both[1]


def clt_experiment(process: ProcessModel, censor: CensorModel, lags, n: int, replicates: int, seed: int,
                   truncation: int | None = None, mode=MeanMode.NONE, burnin: int = DEFAULT_BURNIN,
                   moment: float = 8.0, sigma_scale: float = 1.0, variance_tol: float = 0.10,
                   ks_threshold: float = 0.05, coverage_band=(0.93, 0.97), joint_rel_tol: float = 0.15,
                   joint_abs_floor: float = 0.05, threads: int | None = 1) -> MonteCarloReport:
    """Compare simulated CLT statistics with the theoretical covariance.

    ``sigma_scale`` multiplies the theoretical variances; values other than 1
    serve as negative controls. A failing dependence condition only warns.
    """
    t0 = time.perf_counter()
    lags = sorted(int(v) for v in lags)
    if replicates < 100:
        raise CensacvError("the CLT harness needs at least 100 replicates")
    mode = MeanMode.parse(mode)
    acv = analytic_gamma(process)
    if acv is None:
        raise Unavailable(f"no analytic autocovariance for {process.name}")
    condition = condition_check(process, censor, moment)
    if condition.get("pass") is False:
        warnings.warn(f"dependence condition fails for {process.name}; running as a negative control",
                      RuntimeWarning, stacklevel=2)

    t_hat, t_nu = clt_statistics(process, censor, lags, n, replicates, seed, mode, burnin, threads)

    per_lag = []
    for j, lag in enumerate(lags):
        diag = sigma2_diagnostics(acv, censor, lag, truncation)
        s2 = sigma_scale * diag.value
        emp = float(np.var(t_hat[:, j], ddof=1))
        z = t_hat[:, j] / math.sqrt(s2)
        per_lag.append({
            "lag": lag,
            "sigma2": s2,
            "empirical_variance": emp,
            "empirical_variance_analytic_nu": float(np.var(t_nu[:, j], ddof=1)),
            "relative_gap": abs(emp - s2) / s2,
            "ks_distance": float(stats.kstest(z, "norm").statistic),
            "coverage95": float(np.mean(np.abs(z) <= Z975)),
            "empirical_mean": float(t_hat[:, j].mean()),
            "truncation": diag.truncation,
            "last_shell": diag.last_shell,
        })

    joint = None
    joint_ok = None
    if len(lags) > 1:
        theo = sigma_scale * sigma_matrix(acv, censor, lags, truncation)
        emp = np.cov(t_hat, rowvar=False, ddof=1)
        small = np.abs(theo) < joint_abs_floor
        ok = np.where(small, np.abs(emp - theo) <= joint_abs_floor,
                      np.abs(emp - theo) <= joint_rel_tol * np.abs(theo))
        joint_ok = bool(ok.all())
        joint = {"lags": lags, "theoretical": theo.tolist(), "empirical": emp.tolist(),
                 "entry_ok": ok.tolist(), "rel_tol": joint_rel_tol, "abs_floor": joint_abs_floor}

    lo, hi = coverage_band
    checks = {
        "variance_within_tol": all(p["relative_gap"] <= variance_tol for p in per_lag),
        "ks_below_threshold": all(p["ks_distance"] < ks_threshold for p in per_lag),
        "coverage_in_band": all(lo <= p["coverage95"] <= hi for p in per_lag),
        "joint_within_tol": joint_ok,
    }
    config = {"process": process.spec(), "censor": censor.spec(), "lags": lags, "n": int(n),
              "replicates": int(replicates), "seed": int(seed), "truncation": truncation,
              "mean_mode": mode.value, "burnin": int(burnin), "moment": moment, "sigma_scale": sigma_scale,
              "variance_tol": variance_tol, "ks_threshold": ks_threshold, "coverage_band": list(coverage_band)}
    return MonteCarloReport("clt", config, per_lag, joint, condition, checks,
                            wall_clock=time.perf_counter() - t0, statistics=t_hat)


# --------------------------------------------------------------------------------------
# SLLN


def running_acv(y: np.ndarray, c: np.ndarray, lag: int, n_min: int, mode=MeanMode.NONE) -> np.ndarray:
    """``gamma_tilde`` computed on every prefix ``y[:n]`` for ``n = n_min .. len(y)``."""
    mode = MeanMode.parse(mode)
    N = y.size
    if not lag < n_min <= N:
        raise CensacvError("need lag < n_min <= N")
    a, b = slice(0, N - lag), slice(lag, N)
    # prefix n keeps pair indices i < n - lag, i.e. cumulative entry n - lag - 1
    k = np.arange(n_min, N + 1) - lag - 1
    yy = np.cumsum(y[a] * y[b])[k]
    cc = np.cumsum(c[a] * c[b])[k]
    if mode is MeanMode.NONE:
        num = yy
    else:
        n = np.arange(n_min, N + 1)
        sum_y = np.cumsum(y)[n - 1]
        if mode is MeanMode.MODULATED:
            mu = sum_y / n
            lead, trail = np.cumsum(y[a])[k], np.cumsum(y[b])[k]
            num = yy - mu * (lead + trail) + (n - lag) * mu**2
        else:
            sum_c = np.cumsum(c)[n - 1]
            mu = np.divide(sum_y, sum_c, out=np.zeros_like(sum_y), where=sum_c > 0)
            cross = np.cumsum(y[a] * c[b] + c[a] * y[b])[k]
            num = yy - mu * cross + mu**2 * cc
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(cc > 0, num / cc, np.nan)


def slln_experiment(process: ProcessModel, censor: CensorModel, lag: int, checkpoints, trajectories: int,
                    seed: int, mode=MeanMode.NONE, burnin: int = DEFAULT_BURNIN, min_fraction: float = 0.95,
                    threads: int | None = 1) -> dict:
    """Running sup-errors ``sup_{n >= n0} |gamma_tilde_n(l) - gamma(l)|`` at each checkpoint ``n0``.

    The sup runs over every prefix length between ``n0`` and the last
    checkpoint, so it is nonincreasing in ``n0`` by construction. The share of
    trajectories whose sup-error at the last checkpoint is strictly below the
    one at the first is therefore checked as well.
    """
    t0 = time.perf_counter()
    acv = analytic_gamma(process)
    if acv is None:
        raise Unavailable(f"no analytic autocovariance for {process.name}")
    mode = MeanMode.parse(mode)
    checkpoints = sorted(int(v) for v in checkpoints)
    lag = int(lag)
    n_min, n_max = checkpoints[0], checkpoints[-1]
    target = acv.gamma(lag)
    pos = np.array(checkpoints) - n_min

    def work(start, stop):
        reps = range(start, stop)
        x = simulate_batch(process, n_max, seed, reps, burnin)
        c = simulate_censor_batch(censor, n_max, seed, reps)
        rows = []
        for xi, ci in zip(x, c):
            err = np.abs(running_acv(ci * xi, ci, lag, n_min, mode) - target)
            err = np.where(np.isnan(err), np.inf, err)
            sup = np.maximum.accumulate(err[::-1])[::-1]
            rows.append(sup[pos])
        return np.array(rows)

    sups = np.concatenate(streams.chunked_map(work, trajectories, threads))
    nonincreasing = np.all(np.diff(sups, axis=1) <= 0, axis=1) if len(checkpoints) > 1 else np.ones(len(sups), bool)
    decayed = sups[:, -1] < sups[:, 0] if len(checkpoints) > 1 else np.ones(len(sups), bool)
    fraction = float(nonincreasing.mean())
    report = {
        "experiment": "slln",
        "config": {"process": process.spec(), "censor": censor.spec(), "lag": lag, "checkpoints": checkpoints,
                   "trajectories": int(trajectories), "seed": int(seed), "mean_mode": mode.value,
                   "burnin": int(burnin), "min_fraction": min_fraction},
        "sup_errors": sups.tolist(),
        "median_sup_error": np.median(sups, axis=0).tolist(),
        "fraction_nonincreasing": fraction,
        "fraction_decayed": float(decayed.mean()),
        "checks": {"nonincreasing_fraction": fraction >= min_fraction,
                   "decayed_fraction": float(decayed.mean()) >= min_fraction},
    }
    report["pass"] = all(report["checks"].values())
    log.debug("slln finished in %.2fs", time.perf_counter() - t0)
    return report


# --------------------------------------------------------------------------------------
# config schemas shared by the suite runner and the CLI


def _mode(v):
    return MeanMode.parse(v).value


def _opt_int(v):
    return None if str(v).strip().lower() in ("", "none", "auto") else int(v)


def _band(v):
    lo, hi = (float(p) for p in str(v).split(","))
    return (lo, hi)


COMMON = {"seed": (int, ...), "burnin": (int, DEFAULT_BURNIN)}

SCHEMAS = {
    "clt": {
        "process": (str, ...), "censor": (str, ...), "lags": (cfgmod.parse_int_list, ...), "n": (int, ...),
        "replicates": (int, ...), "truncation": (_opt_int, None), "mean_mode": (_mode, "none"),
        "moment": (float, 8.0), "sigma_scale": (float, 1.0), "variance_tol": (float, 0.10),
        "ks_threshold": (float, 0.05), "coverage_band": (_band, (0.93, 0.97)),
        "joint_rel_tol": (float, 0.15), "joint_abs_floor": (float, 0.05), **COMMON,
    },
    "slln": {
        "process": (str, ...), "censor": (str, ...), "lag": (int, ...),
        "checkpoints": (cfgmod.parse_int_list, ...), "trajectories": (int, ...), "mean_mode": (_mode, "none"),
        "min_fraction": (float, 0.95), **COMMON,
    },
    "ratio": {
        "generator": (str, ...), "regime": (str, "iid"), "p": (float, 2.0), "q": (float, 4.0),
        "n_grid": (cfgmod.parse_int_list, ...), "replicates": (int, ...), "slope_band": (_band, (-0.6, -0.4)),
        "seed": (int, ...),
    },
    "spectral": {
        "process": (str, ...), "censor": (str, ...), "g": (cfgmod.parse_coeffs, ...), "s": (float, 2.0),
        "n_grid": (cfgmod.parse_int_list, ...), "replicates": (int, ...), "mean_mode": (_mode, "none"),
        "slope_band": (_band, (-1.2, -0.8)), **COMMON,
    },
}


def run_experiment(kind: str, cfg: dict, threads: int | None = 1) -> dict:
    """Run one experiment from a resolved config and return its JSON-ready report."""
    if kind == "clt":
        rep = clt_experiment(
            cfgmod.parse_process(cfg["process"]), cfgmod.parse_censor(cfg["censor"]), cfg["lags"], cfg["n"],
            cfg["replicates"], cfg["seed"], truncation=cfg["truncation"], mode=cfg["mean_mode"],
            burnin=cfg["burnin"], moment=cfg["moment"], sigma_scale=cfg["sigma_scale"],
            variance_tol=cfg["variance_tol"], ks_threshold=cfg["ks_threshold"],
            coverage_band=cfg["coverage_band"], joint_rel_tol=cfg["joint_rel_tol"],
            joint_abs_floor=cfg["joint_abs_floor"], threads=threads)
        return rep.to_dict()
    if kind == "slln":
        return slln_experiment(
            cfgmod.parse_process(cfg["process"]), cfgmod.parse_censor(cfg["censor"]), cfg["lag"],
            cfg["checkpoints"], cfg["trajectories"], cfg["seed"], mode=cfg["mean_mode"], burnin=cfg["burnin"],
            min_fraction=cfg["min_fraction"], threads=threads)
    if kind == "ratio":
        mcfg = moment_config(cfg["p"], cfg["q"])
        rep = rate_experiment(cfgmod.parse_generator(cfg["generator"]), cfg["p"], cfg["n_grid"],
                              cfg["replicates"], cfg["seed"], regime=cfgmod.parse_regime(cfg["regime"]),
                              cfg=mcfg, threads=threads)
        rep.slope_band = cfg["slope_band"]
        out = rep.to_dict()
        out["moment_config"] = mcfg.to_dict()
        out["checks"] = {"slope_in_band": out["pass"],
                         "regime_condition": None if rep.regime_check is None else rep.regime_check["pass"]}
        out["pass"] = all(v for v in out["checks"].values() if v is not None)
        return out
    if kind == "spectral":
        g = SpectralFunctional(cfg["g"], cfg["s"])
        rep = spectral_convergence_experiment(
            cfgmod.parse_process(cfg["process"]), cfgmod.parse_censor(cfg["censor"]), g, cfg["n_grid"],
            cfg["replicates"], cfg["seed"], mode=cfg["mean_mode"], burnin=cfg["burnin"], threads=threads)
        out = rep.to_dict()
        lo, hi = cfg["slope_band"]
        out["checks"] = {"strictly_decreasing": rep.strictly_decreasing,
                         "slope_in_band": bool(lo <= rep.slope <= hi)}
        out["pass"] = all(out["checks"].values())
        return out
    raise ConfigError(f"unknown experiment type {kind!r}")


def resolve_experiment(kind: str, file_values: dict, overrides: dict | None = None) -> dict:
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment type {kind!r} (choose from {', '.join(SCHEMAS)})")
    return cfgmod.resolve(SCHEMAS[kind], file_values, overrides or {})


def wrap_report(name: str, kind: str, cfg: dict, result: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "name": name, "type": kind, "resolved_config": cfg, "result": result}


def split_suite(entries: dict) -> tuple[list, dict]:
    """Split a suite file into the experiment list and per-experiment key sets."""
    names = [v.strip() for v in entries.get("experiments", "").split(",") if v.strip()]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate experiment names")
    per = {name: {} for name in names}
    for key, value in entries.items():
        if key == "experiments":
            continue
        name, _, sub = key.partition(".")
        if not sub or name not in per:
            raise ConfigError(f"key {key!r} does not belong to a listed experiment")
        per[name][sub] = value
    return names, per


def run_suite(config_path, out_dir, threads: int | None = 1) -> dict:
    """Run every experiment of a suite file and write one JSON report each.

    Writes ``<name>.json`` per experiment, ``summary.json`` (deterministic) and
    ``timings.json`` (wall-clock seconds). Failures are isolated per experiment.
    """
    entries = cfgmod.read_config(config_path)
    names, per = split_suite(entries)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary, timings = {}, {}
    for name in names:
        values = dict(per[name])
        kind = values.pop("type", None)
        t0 = time.perf_counter()
        try:
            if kind is None:
                raise ConfigError(f"experiment {name!r} has no type")
            cfg = resolve_experiment(kind, values)
            result = run_experiment(kind, cfg, threads)
            report = wrap_report(name, kind, cfg, result)
            summary[name] = {"type": kind, "pass": result.get("pass"), "error": None}
        except (CensacvError, ArithmeticError) as exc:
            report = {"schema": SCHEMA_VERSION, "name": name, "type": kind, "error": str(exc)}
            summary[name] = {"type": kind, "pass": False, "error": str(exc)}
            log.error("experiment %s failed: %s", name, exc)
        timings[name] = time.perf_counter() - t0
        (out_dir / f"{name}.json").write_text(dumps(report))
    bundle = {"schema": SCHEMA_VERSION, "experiments": names, "summary": summary,
              "all_pass": all(s["pass"] for s in summary.values())}
    (out_dir / "summary.json").write_text(dumps(bundle))
    (out_dir / "timings.json").write_text(dumps(timings))
    return bundle
