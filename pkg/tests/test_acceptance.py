"""Acceptance criteria, each at its stated tolerance.

The Monte Carlo criteria read the reports of one run of
``configs/acceptance.cfg``; criterion 11 reruns the suite and compares bytes.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from censacv import montecarlo as mc
from censacv.asymptotics import ConstantCensor, clt_condition, sigma2, white_noise_acv
from censacv.estimators import parzen_acv
from censacv.ratio import CausalGamma, LambdaNC, Mixing, moment_config, ratio_condition
from censacv.series import ModulatedSeries
from censacv.simulators import AR1, Bernoulli, simulate

SUITE = Path(__file__).resolve().parents[1] / "configs" / "acceptance.cfg"


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance_a")
    bundle = mc.run_suite(SUITE, out, threads=1)
    reports = {name: json.loads((out / f"{name}.json").read_text()) for name in bundle["experiments"]}
    timings = json.loads((out / "timings.json").read_text())
    return out, bundle, reports, timings


def textbook_acv(x, lag):
    n = len(x)
    mean = sum(x) / n
    return sum((x[i] - mean) * (x[i + lag] - mean) for i in range(n - lag)) / (n - lag)


def test_criterion_01_reduction_oracle(acceptance_record):
    rng = np.random.default_rng(20240101)
    lags = (0, 1, 5, 25)
    data = [rng.standard_normal(1000) for _ in range(100)]
    t0 = time.perf_counter()
    got = [[parzen_acv(ModulatedSeries(x, np.ones(1000)), lag, "modulated").gamma_tilde for lag in lags]
           for x in data]
    elapsed = time.perf_counter() - t0
    worst = max(abs(g - textbook_acv(x, lag)) / abs(textbook_acv(x, lag))
                for x, row in zip(data, got) for g, lag in zip(row, lags))
    ok = worst <= 1e-12 and elapsed < 1.0
    acceptance_record(1, "c=1 reduces to textbook sample ACV", ok,
                      f"(max rel err {worst:.2e} over 100 series, {elapsed:.3f}s)")
    assert ok


def test_criterion_02_variance_oracle(suite_run, acceptance_record):
    _, _, reports, timings = suite_run
    per_lag = reports["clt_bernoulli"]["result"]["per_lag"]
    gaps = [p["relative_gap"] for p in per_lag]
    ok = all(g <= 0.10 for g in gaps) and timings["clt_bernoulli"] < 120
    acceptance_record(2, "empirical CLT variance within 10% of sigma2", ok,
                      f"(gaps {[round(g, 4) for g in gaps]}, {timings['clt_bernoulli']:.1f}s)")
    assert ok


def test_criterion_03_classical_anchor(suite_run, acceptance_record):
    _, _, reports, _ = suite_run
    per_lag = {p["lag"]: p for p in reports["clt_classical"]["result"]["per_lag"]}
    wn, full = white_noise_acv(1.0), ConstantCensor(1.0)
    analytic = [sigma2(wn, full, 0, 200), sigma2(wn, full, 1, 200)]
    ok = (abs(analytic[0] - 2.0) <= 1e-12 and abs(analytic[1] - 1.0) <= 1e-12
          and abs(per_lag[0]["empirical_variance"] - 2.0) <= 0.2
          and abs(per_lag[1]["empirical_variance"] - 1.0) <= 0.1)
    acceptance_record(3, "classical values 2 and 1 under full observation", ok,
                      f"(analytic {analytic}, empirical {per_lag[0]['empirical_variance']:.4f}, "
                      f"{per_lag[1]['empirical_variance']:.4f})")
    assert ok


def test_criterion_04_normality(suite_run, acceptance_record):
    _, _, reports, _ = suite_run
    per_lag = reports["clt_bernoulli"]["result"]["per_lag"]
    ks = [p["ks_distance"] for p in per_lag]
    cov = [p["coverage95"] for p in per_lag]
    ok = all(k < 0.05 for k in ks) and all(0.93 <= c <= 0.97 for c in cov)
    acceptance_record(4, "KS < 0.05 and 95% coverage in [0.93, 0.97]", ok,
                      f"(KS {[round(k, 4) for k in ks]}, coverage {cov})")
    assert ok


def test_criterion_05_joint_clt(suite_run, acceptance_record):
    _, _, reports, _ = suite_run
    joint = reports["clt_bernoulli"]["result"]["joint"]
    theo, emp = np.array(joint["theoretical"]), np.array(joint["empirical"])
    small = np.abs(theo) < 0.05
    ok_entries = np.where(small, np.abs(emp - theo) <= 0.05, np.abs(emp - theo) <= 0.15 * np.abs(theo))
    rel = np.where(small, np.nan, np.abs(emp - theo) / np.abs(theo))
    ok = bool(ok_entries.all()) and theo.shape == (3, 3)
    acceptance_record(5, "joint 3x3 covariance within 15%", ok, f"(max rel gap {np.nanmax(rel):.4f})")
    assert ok


def test_criterion_06_ratio_rate(suite_run, acceptance_record):
    _, _, reports, timings = suite_run
    parts, ok = [], True
    for name in ("ratio_iid", "ratio_causal", "ratio_noncausal"):
        res = reports[name]["result"]
        ok &= (-0.6 <= res["slope"] <= -0.4 and timings[name] < 120 and res["replicates"] == 500
               and res["n_grid"] == [2**k for k in range(8, 15)])
        parts.append(f"{name} {res['slope']:.3f} in {timings[name]:.1f}s")
    acceptance_record(6, "ratio-of-means slope in [-0.6, -0.4]", ok, "(" + ", ".join(parts) + ")")
    assert ok


def test_criterion_07_spectral(suite_run, acceptance_record):
    _, _, reports, _ = suite_run
    res = reports["spectral"]["result"]
    err = res["mean_sq_dual_error"]
    ok = res["strictly_decreasing"] and all(b < a for a, b in zip(err, err[1:])) and -1.2 <= res["slope"] <= -0.8
    acceptance_record(7, "dual error strictly decreasing, slope in [-1.2, -0.8]", ok,
                      f"(slope {res['slope']:.3f}, KS {res['normality']['ks_fitted_normal']:.3f})")
    assert ok


def test_criterion_08_slln(suite_run, acceptance_record):
    _, _, reports, _ = suite_run
    res = reports["slln"]["result"]
    count = round(res["fraction_nonincreasing"] * 20)
    ok = count >= 19 and len(res["sup_errors"]) == 20
    acceptance_record(8, ">= 19/20 trajectories with nonincreasing sup-error", ok,
                      f"({count}/20; decayed {res['fraction_decayed']:.2f})")
    assert ok


def test_criterion_09_condition_thresholds(acceptance_record):
    checks = []
    r = clt_condition("theta", 2, 5)
    checks.append(math.isclose(r.threshold, 16 / 9, rel_tol=1e-15) and r.passed)
    r = clt_condition("kappa", 3, 6)
    checks.append(r.threshold == 3.375 and not r.passed)
    r = clt_condition("lambda", 7, 6)
    checks.append(r.threshold == 6.375 and r.passed)
    for m in (5, 6, 7.5, 10):
        checks.append(clt_condition("theta", 1, m).threshold == (m - 1) / (m - 2) * (1 + 1 / (m - 2)))
        checks.append(clt_condition("kappa", 1, m).threshold == m / (m - 2) * (2 + 1 / (m - 2)))
        checks.append(clt_condition("lambda", 1, m).threshold == m / (m - 2) * (4 + 1 / (m - 2)))
    cfg = moment_config(2, 4)
    checks.append((cfg.r, cfg.s) == (4.0, 6.0))
    r = ratio_condition(LambdaNC(3), cfg)
    checks.append(r.threshold == 2 and r.passed)
    r = ratio_condition(CausalGamma(1.9), cfg)
    checks.append(r.threshold == 2 and not r.passed)
    r = ratio_condition(Mixing(3, 8), cfg)
    checks.append(math.isclose(r.threshold, 8 / 3, rel_tol=1e-15) and r.passed)
    ok = all(checks)
    acceptance_record(9, "printed condition thresholds reproduced", ok, f"({sum(checks)}/{len(checks)} checks)")
    assert ok


def test_criterion_10_non_mixing_uniform(acceptance_record):
    x = simulate(AR1(0.5, Bernoulli(0.5)), 100_000, 10)
    ks = stats.kstest(x, stats.uniform(0, 2).cdf).statistic
    ok = ks < 0.01
    acceptance_record(10, "Bernoulli(1/2)-driven AR(1) is uniform on [0, 2]", ok, f"(KS {ks:.4f})")
    assert ok


def test_criterion_11_determinism(suite_run, tmp_path, acceptance_record):
    first, bundle, _, _ = suite_run
    second = tmp_path / "acceptance_b"
    mc.run_suite(SUITE, second, threads=4)
    names = [f"{n}.json" for n in bundle["experiments"]] + ["summary.json"]
    same = [(first / n).read_bytes() == (second / n).read_bytes() for n in names]
    ok = all(same)
    acceptance_record(11, "suite reports byte-identical across reruns", ok,
                      f"({sum(same)}/{len(same)} files identical, second run with 4 threads)")
    assert ok
