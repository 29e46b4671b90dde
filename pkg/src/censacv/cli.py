"""Command line entry point: ``censacv <subcommand> ...``.

Exit codes: 0 success, 1 validation error (bad flags, config or input),
2 runtime error. Diagnostics go to stderr, data to stdout or files.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import montecarlo as mc
from .asymptotics import (DecayKind, clt_condition, heredity_transform, sigma2_diagnostics, sigma_matrix,
                          slln_condition)
from .errors import CensacvError, ConfigError
from .estimators import MeanMode, acf_from_profile, acv_profile
from .series import ModulatedSeries, format_csv, read_csv
from .simulators import (DEFAULT_BURNIN, analytic_gamma, mean_abs, simulate, simulate_censor, theta_bound)
from .spectral import SpectralFunctional, integrated_functional, modified_periodogram, sobolev_norm
from .streams import default_threads

log = logging.getLogger("censacv")


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _file_values(path) -> dict:
    return cfgmod.read_config(path) if path else {}


def _set_overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


# --------------------------------------------------------------------------------------


def cmd_estimate(args) -> int:
    series = read_csv(args.input)
    if args.max_lag >= series.N:
        raise ConfigError(f"--max-lag {args.max_lag} must be below N={series.N}")
    mode = MeanMode.parse(args.mean_mode)
    profile = acv_profile(series, args.max_lag, mode)
    acf = acf_from_profile(profile)
    for e in profile:
        if e.flag:
            log.warning("lag %d: %s", e.lag, e.flag)
    estimates = []
    for e, rho in zip(profile, acf):
        d = e.to_dict()
        d["rho_tilde"] = None if math.isnan(rho) else rho
        estimates.append(d)
    report = {"schema": mc.SCHEMA_VERSION, "command": "estimate",
              "config": {"input": str(args.input), "max_lag": args.max_lag, "mean_mode": mode.value},
              "metadata": series.metadata(), "estimates": estimates}
    if args.csv:
        rows = ["lag,gamma_tilde,rho_tilde,nu_hat"]
        for e, rho in zip(profile, acf):
            rows.append(f"{e.lag},{e.gamma_tilde!r},{rho!r},{e.nu_hat!r}")
        Path(args.csv).write_text("\n".join(rows) + "\n")
    _emit(mc.dumps(report), args.out)
    return 0


SIM_SCHEMA = {"process": (str, ...), "censor": (str, "constant(1)"), "n": (int, ...), "seed": (int, ...),
              "burnin": (int, DEFAULT_BURNIN), "theta_table": (int, 20), "gamma_lags": (int, 10)}


def cmd_simulate(args) -> int:
    cfg = cfgmod.resolve(SIM_SCHEMA, _file_values(args.config),
                         {"process": args.process, "censor": args.censor, "n": args.n, "seed": args.seed,
                          "burnin": args.burnin})
    process = cfgmod.parse_process(cfg["process"])
    censor = cfgmod.parse_censor(cfg["censor"])
    x = simulate(process, cfg["n"], cfg["seed"], cfg["burnin"])
    c = simulate_censor(censor, cfg["n"], cfg["seed"])
    series = ModulatedSeries(c * x, c)
    acv = analytic_gamma(process)
    sidecar = {
        "schema": mc.SCHEMA_VERSION, "command": "simulate", "config": cfg,
        "process": process.spec(), "censor": censor.spec(), "metadata": series.metadata(),
        "contraction": process.contraction(), "mean_abs": mean_abs(process),
        "theta_bound": [theta_bound(process, r) for r in range(cfg["theta_table"] + 1)],
        "analytic_gamma": None if acv is None else [acv.gamma(k) for k in range(cfg["gamma_lags"] + 1)],
        "nu": [censor.nu(k) for k in range(cfg["gamma_lags"] + 1)],
    }
    if args.out in (None, "-"):
        sys.stdout.write(format_csv(series))
        sys.stderr.write(mc.dumps(sidecar))
    else:
        out = Path(args.out)
        out.write_text(format_csv(series))
        out.with_suffix(".json").write_text(mc.dumps(sidecar))
    return 0


ASY_SCHEMA = {"process": (str, ...), "censor": (str, ...), "lags": (cfgmod.parse_int_list, ...),
              "truncation": (mc._opt_int, None), "moment": (float, 8.0), "decays": (cfgmod.parse_decays, []),
              "growth": (float, 2.0)}


def cmd_asymptotics(args) -> int:
    cfg = cfgmod.resolve(ASY_SCHEMA, _file_values(args.config), _set_overrides(args.set))
    process = cfgmod.parse_process(cfg["process"])
    censor = cfgmod.parse_censor(cfg["censor"])
    acv = analytic_gamma(process)
    if acv is None:
        raise ConfigError(f"no analytic autocovariance for {process.name}; use ar1 with gaussian innovations")
    lags = sorted(cfg["lags"])
    per_lag = []
    for lag in lags:
        d = sigma2_diagnostics(acv, censor, lag, cfg["truncation"], literal=True)
        per_lag.append({"lag": lag, "sigma2": d.value, "truncation": d.truncation, "last_shell": d.last_shell,
                        "summable": d.summable, "literal_sigma2": d.literal_value,
                        "literal_discrepancy": d.literal_value - d.value, "nu": censor.nu(lag),
                        "gamma": acv.gamma(lag)})
    m = cfg["moment"]
    decay_checks = []
    for dec in cfg["decays"]:
        entry = {"kind": dec.kind.value, "rate": dec.rate, "constant": dec.constant}
        if dec.kind is not DecayKind.CAUSAL_GAMMA:
            entry["clt"] = clt_condition(dec.kind, dec.rate, m).to_dict()
            h = heredity_transform(dec, m, cfg["growth"])
            entry["product_process_rate"] = h.rate
            entry["product_process_clt"] = clt_condition(dec.kind, h.rate, m).to_dict()
        if dec.kind is DecayKind.THETA:
            entry["slln"] = slln_condition(dec.rate, m).to_dict()
        decay_checks.append(entry)
    report = {
        "schema": mc.SCHEMA_VERSION, "command": "asymptotics", "config": {**cfg, "decays": [
            {"kind": d.kind.value, "rate": d.rate, "constant": d.constant} for d in cfg["decays"]]},
        "process": process.spec(), "censor": censor.spec(), "per_lag": per_lag,
        "sigma_matrix": sigma_matrix(acv, censor, lags, cfg["truncation"]).tolist() if lags else [],
        "model_condition": mc.condition_check(process, censor, m), "decay_checks": decay_checks,
    }
    _emit(mc.dumps(report), args.out)
    return 0


def cmd_spectral(args) -> int:
    series = read_csv(args.input)
    g = SpectralFunctional(cfgmod.parse_coeffs(args.g), args.s)
    mode = MeanMode.parse(args.mean_mode)
    L = max(g.support, args.max_lag) if args.max_lag is not None else g.support
    lambdas = np.linspace(-np.pi, np.pi, args.grid_points)
    pgram = modified_periodogram(series, lambdas, args.periodogram_lag, mode)
    j = integrated_functional(series, g, L, mode)
    if pgram.flagged_lags:
        log.warning("zero-overlap lags contribute 0: %s", pgram.flagged_lags)
    if args.periodogram_out:
        Path(args.periodogram_out).write_text(pgram.to_csv())
    report = {"schema": mc.SCHEMA_VERSION, "command": "spectral",
              "config": {"input": str(args.input), "g": g.to_dict(), "max_lag": L, "mean_mode": mode.value,
                         "periodogram_lag": pgram.max_lag, "grid_points": args.grid_points},
              "metadata": series.metadata(), "J_tilde": j, "sobolev_norm": sobolev_norm(g),
              "flags": {"zero_overlap_lags": pgram.flagged_lags},
              "periodogram": {"lambda": pgram.lambdas.tolist(), "value": pgram.values.tolist()}}
    _emit(mc.dumps(report), args.out)
    return 0


def _mc_command(kind):
    def run(args) -> int:
        overrides = _set_overrides(args.set)
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        cfg = mc.resolve_experiment(kind, _file_values(args.config), overrides)
        result = mc.run_experiment(kind, cfg, args.threads)
        report = mc.wrap_report(kind, kind, cfg, result)
        text = mc.dumps(report)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{kind}.json").write_text(text)
        else:
            sys.stdout.write(text)
        log.info("%s: %s", kind, "PASS" if result.get("pass") else "FAIL")
        return 0
    return run


def cmd_suite(args) -> int:
    bundle = mc.run_suite(args.config, args.out, args.threads)
    sys.stdout.write(mc.dumps(bundle))
    return 0


# --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = Parser(prog="censacv", description="Autocovariance estimation under amplitude modulation.")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("estimate", help="Parzen autocovariances of a CSV series")
    p.add_argument("--input", required=True)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--mean-mode", choices=[m.value for m in MeanMode], default="modulated")
    p.add_argument("--csv", help="also write lag,gamma_tilde,rho_tilde,nu_hat here")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="simulate a latent process and censoring, write y,c CSV")
    p.add_argument("--config")
    p.add_argument("--process", help="e.g. 'ar1(phi=0.5, innovation=gaussian(1))'")
    p.add_argument("--censor", help="e.g. 'bernoulli(p=0.7)'")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--burnin", type=int)
    p.add_argument("--out", help="CSV path; the JSON sidecar goes next to it")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptotics", help="asymptotic variances and dependence conditions")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("spectral", help="modified periodogram and integrated functional")
    p.add_argument("--input", required=True)
    p.add_argument("--g", required=True, help="coefficients as 'lag:value, ...'")
    p.add_argument("--s", type=float, default=2.0, help="Sobolev index (> 1)")
    p.add_argument("--max-lag", type=int)
    p.add_argument("--periodogram-lag", type=int, help="truncation lag for the periodogram (default N^(1/3))")
    p.add_argument("--grid-points", type=int, default=257)
    p.add_argument("--mean-mode", choices=[m.value for m in MeanMode], default="modulated")
    p.add_argument("--periodogram-out", help="write lambda,periodogram CSV here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectral)

    for kind, name in (("clt", "mc-clt"), ("slln", "mc-slln"), ("ratio", "mc-ratio"), ("spectral", "mc-spectral")):
        p = sub.add_parser(name, help=f"Monte Carlo {kind} experiment")
        p.add_argument("--config")
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default: JSON to stdout)")
        p.set_defaults(func=_mc_command(kind))

    p = sub.add_parser("mc-suite", help="run a suite file of experiments")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads is None:
        args.threads = default_threads()
    try:
        return args.func(args)
    except (CensacvError, FileNotFoundError) as exc:
        sys.stderr.write(f"censacv: error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"censacv: runtime error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
