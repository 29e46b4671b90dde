import json
import math

import numpy as np
import pytest

from censacv import montecarlo as mc
from censacv.asymptotics import BernoulliCensor, MarkovCensor, PeriodicCensor
from censacv.errors import CensacvError, ConfigError, Unavailable
from censacv.estimators import parzen_acv
from censacv.series import ModulatedSeries
from censacv.simulators import AR1, ARCH, Gaussian


def small_clt(**kw):
    args = dict(process=AR1(0.5, Gaussian(1.0)), censor=BernoulliCensor(0.7), lags=[0, 1], n=1000,
                replicates=400, seed=1, truncation=120)
    args.update(kw)
    return mc.clt_experiment(**args)


def test_clt_small_run_is_consistent():
    rep = small_clt()
    d = rep.to_dict()
    assert d["experiment"] == "clt" and len(d["per_lag"]) == 2
    for p in d["per_lag"]:
        assert p["relative_gap"] < 0.2
        assert 0.9 < p["coverage95"] < 0.99
    assert d["joint"]["lags"] == [0, 1]
    assert d["condition"]["pass"] is True


def test_clt_negative_control():
    rep = small_clt(sigma_scale=4.0)
    assert all(p["relative_gap"] > 0.5 for p in rep.per_lag)
    assert not rep.passed


def test_clt_requirements():
    with pytest.raises(CensacvError):
        small_clt(replicates=99)
    with pytest.raises(Unavailable):
        small_clt(process=ARCH())


def test_clt_parallel_invariance():
    a = mc.dumps(small_clt(threads=1, replicates=200).to_dict())
    b = mc.dumps(small_clt(threads=4, replicates=200).to_dict())
    assert a == b


def test_condition_check():
    assert mc.condition_check(AR1(0.5), MarkovCensor(0.2, 0.3), 8)["pass"] is True
    assert mc.condition_check(AR1(0.5), PeriodicCensor((1.0, 0.0)), 8)["pass"] is None


@pytest.mark.parametrize("mode", ["none", "modulated", "ratio"])
def test_running_acv_matches_direct_prefixes(mode):
    rng = np.random.default_rng(3)
    c = (rng.random(120) < 0.7).astype(float)
    y = c * rng.standard_normal(120)
    run = mc.running_acv(y, c, 2, 40, mode)
    for n in (40, 41, 77, 120):
        direct = parzen_acv(ModulatedSeries(y[:n], c[:n]), 2, mode).gamma_tilde
        assert run[n - 40] == pytest.approx(direct, rel=1e-10, abs=1e-13)


def test_slln_experiment():
    rep = mc.slln_experiment(AR1(0.0), BernoulliCensor(0.7), 1, [2**k for k in range(8, 13)], 10, seed=4)
    assert rep["fraction_nonincreasing"] == 1.0
    assert rep["fraction_decayed"] >= 0.9
    one = mc.slln_experiment(AR1(0.5), BernoulliCensor(0.7), 1, [1024], 3, seed=4)
    assert one["pass"] is True


def test_dumps_handles_non_finite_and_numpy():
    text = mc.dumps({"b": np.float64(1.5), "a": [math.nan, math.inf], "c": np.arange(2)})
    assert json.loads(text) == {"a": [None, "inf"], "b": 1.5, "c": [0, 1]}
    assert text.index('"a"') < text.index('"b"')


def test_split_suite():
    names, per = mc.split_suite({"experiments": "a, b", "a.type": "clt", "b.seed": "3"})
    assert names == ["a", "b"] and per == {"a": {"type": "clt"}, "b": {"seed": "3"}}
    with pytest.raises(ConfigError):
        mc.split_suite({"experiments": "a", "z.seed": "1"})
    with pytest.raises(ConfigError):
        mc.split_suite({"experiments": "a, a"})


def test_resolve_experiment_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        mc.resolve_experiment("clt", {"process": "ar1()", "bogus": "1"})
    with pytest.raises(ConfigError):
        mc.resolve_experiment("clt", {"process": "ar1()"})
    with pytest.raises(ConfigError):
        mc.resolve_experiment("nope", {})


SUITE = """
experiments = one, broken
one.type = ratio
one.generator = iid
one.n_grid = 64, 128, 256, 512
one.replicates = 50
one.seed = 2
broken.type = clt
broken.process = arch()
broken.censor = constant(1)
broken.lags = 1
broken.n = 100
broken.replicates = 100
broken.seed = 1
"""


def test_run_suite_isolates_failures_and_is_deterministic(tmp_path):
    cfg = tmp_path / "suite.cfg"
    cfg.write_text(SUITE)
    b1 = mc.run_suite(cfg, tmp_path / "r1", threads=1)
    mc.run_suite(cfg, tmp_path / "r2", threads=3)
    assert b1["summary"]["broken"]["pass"] is False and b1["summary"]["broken"]["error"]
    assert b1["summary"]["one"]["error"] is None
    for name in ("one.json", "broken.json", "summary.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    rep = json.loads((tmp_path / "r1" / "one.json").read_text())
    assert rep["schema"] == 1 and rep["resolved_config"]["replicates"] == 50


def test_empty_suite(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("# nothing\n")
    bundle = mc.run_suite(cfg, tmp_path / "out")
    assert bundle["experiments"] == [] and bundle["all_pass"] is True
