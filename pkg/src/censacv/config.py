"""Flat key-value configuration files and model spec strings.

File format::

    # comment
    key = value
    name.key = value      # namespaced keys, used by suite files

Model specs use call syntax, for example
``ar1(phi=0.5, innovation=gaussian(sigma=1))`` or ``markov(p01=0.2, p10=0.3)``.
They are parsed with :mod:`ast`; only literals and known constructors are
accepted.
"""
from __future__ import annotations

import ast
import re
from pathlib import Path

from . import asymptotics as asy
from . import ratio, simulators
from .errors import ConfigError

INNOVATIONS = {
    "gaussian": simulators.Gaussian,
    "normal": simulators.Gaussian,
    "uniform": simulators.Uniform,
    "bernoulli": simulators.Bernoulli,
    "rademacher": simulators.Rademacher,
}
PROCESSES = {
    "ar1": simulators.AR1,
    "npar": simulators.NPAR,
    "arch": simulators.ARCH,
    "ararch": simulators.ARARCH,
    "bilinear": simulators.Bilinear,
}
CENSORS = {
    "constant": asy.ConstantCensor,
    "bernoulli": asy.BernoulliCensor,
    "markov": asy.MarkovCensor,
    "periodic": asy.PeriodicCensor,
}
GENERATORS = {
    "iid": ratio.IidShiftedBernoulli,
    "causal_ar1": ratio.CausalAR1Pairs,
    "noncausal_bounded": ratio.NonCausalBounded,
    "constant_v": ratio.ConstantV,
}
REGIMES = {
    "iid": ratio.IID,
    "mixing": ratio.Mixing,
    "causal_gamma": ratio.CausalGamma,
    "lambda_nc": ratio.LambdaNC,
}


def _decay_factory(kind):
    return lambda rate, constant=1.0: asy.DependenceDecay(kind, rate, constant)


DECAYS = {k.value: _decay_factory(k) for k in asy.DecayKind}
DECAYS["lambda_"] = DECAYS["lambda"]  # 'lambda' is a Python keyword, see _parse_expr
_LAMBDA_CALL = re.compile(r"\blambda\s*\(")


def _literal(node):
    try:
        return ast.literal_eval(node)
    except ValueError:
        raise ConfigError(f"unsupported expression {ast.unparse(node)!r}") from None


def _build(node, registry, nested):
    if isinstance(node, ast.Name):
        node = ast.Call(func=node, args=[], keywords=[])
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ConfigError(f"expected a constructor call, got {ast.unparse(node)!r}")
    name = node.func.id.lower()
    if name not in registry:
        raise ConfigError(f"unknown name {name!r} (choose from {', '.join(sorted(registry))})")
    args = [_literal(a) for a in node.args]
    kwargs = {}
    for kw in node.keywords:
        if kw.arg in nested:
            kwargs[kw.arg] = _build(kw.value, *nested[kw.arg])
        else:
            kwargs[kw.arg] = _literal(kw.value)
    if name == "periodic":
        pat = (args or [kwargs.pop("pattern", None)])[0]
        if isinstance(pat, str):
            pat = [float(ch) for ch in pat]
        args, kwargs = [tuple(pat)], kwargs
    try:
        return registry[name](*args, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad arguments for {name}: {exc}") from None


def _parse_expr(text: str):
    text = _LAMBDA_CALL.sub("lambda_(", text)
    try:
        return ast.parse(text.strip(), mode="eval").body
    except SyntaxError:
        raise ConfigError(f"cannot parse spec {text!r}") from None


def parse_process(text: str) -> simulators.ProcessModel:
    return _build(_parse_expr(text), PROCESSES, {"innovation": (INNOVATIONS, {})})


def parse_innovation(text: str) -> simulators.Innovation:
    return _build(_parse_expr(text), INNOVATIONS, {})


def parse_censor(text: str) -> asy.CensorModel:
    return _build(_parse_expr(text), CENSORS, {})


def parse_generator(text: str) -> ratio.RatioGenerator:
    return _build(_parse_expr(text), GENERATORS, {})


def parse_regime(text: str):
    return _build(_parse_expr(text), REGIMES, {})


def parse_decays(text: str) -> list:
    node = _parse_expr(text)
    items = node.elts if isinstance(node, ast.Tuple) else [node]
    return [_build(item, DECAYS, {}) for item in items]


_POW_RANGE = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*\.\.\s*(\d+)\s*\^\s*(\d+)\s*$")


def parse_int_list(text) -> list[int]:
    """``"0, 1, 2"`` or a power range ``"2^8..2^14"``."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    m = _POW_RANGE.match(str(text))
    if m:
        base, lo, base2, hi = (int(g) for g in m.groups())
        if base != base2 or lo > hi:
            raise ConfigError(f"bad power range {text!r}")
        return [base**e for e in range(lo, hi + 1)]
    try:
        return [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}") from None


def parse_coeffs(text) -> dict[int, float]:
    """``"0:1, 1:0.5"`` into ``{0: 1.0, 1: 0.5}``."""
    if isinstance(text, dict):
        return {int(k): float(v) for k, v in text.items()}
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        try:
            lag, value = item.split(":")
            out[int(lag)] = float(value)
        except ValueError:
            raise ConfigError(f"expected lag:value pairs, got {item!r}") from None
    return out


def read_config(path) -> dict[str, str]:
    """Read ``key = value`` lines into a dict of raw strings."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def resolve(schema: dict, file_values: dict, overrides: dict) -> dict:
    """Merge defaults < file values < overrides and convert with the schema.

    ``schema`` maps key to ``(converter, default)``; a default of ``...``
    marks a required key. Unknown keys raise :class:`ConfigError`.
    """
    unknown = (set(file_values) | set(overrides)) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for key, (convert, default) in schema.items():
        if overrides.get(key) is not None:
            raw = overrides[key]
        elif key in file_values:
            raw = file_values[key]
        elif default is ...:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            out[key] = default
            continue
        try:
            out[key] = convert(raw) if isinstance(raw, str) or convert in (int, float) else raw
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    return out
