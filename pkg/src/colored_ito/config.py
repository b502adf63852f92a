"""Flat ``key = value`` experiment configuration files.

Blank lines and ``#`` comments are ignored; lists are comma separated. Step
sizes may be written as fractions (``1/22``). Schemes use the tokens

    euler            forward Euler
    euler+ito        forward Euler with the generalized Ito correction
    decentered@0.5   decentered scheme with lambda = 0.5 (append +ito to correct)
    midpoint         fine-step Heun reference (colored noise only)
"""

import re
from fractions import Fraction
from pathlib import Path

from .errors import ConfigurationError
from .experiment import ExperimentConfig
from .integrators import SchemeSpec
from .spectral import ModelConfig

_MODEL_KEYS = {"c": float, "mu": float, "epsilon": float, "rho": float, "k0": int, "n_x": int, "t_final": float}
_LIST_KEYS = {"alphas", "dts", "schemes"}
_SCALAR_KEYS = {"realizations": int, "base_seed": int, "output": str, "workers": int}

_SCHEME_RE = re.compile(r"^(euler|decentered|midpoint)(?:@([0-9.eE+-]+))?(\+ito)?$")
_KIND = {"euler": "euler_forward", "decentered": "decentered", "midpoint": "midpoint_reference"}
_TOKEN = {v: k for k, v in _KIND.items()}


def parse_number(text):
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def parse_scheme(token):
    m = _SCHEME_RE.match(token.strip())
    if not m:
        raise ConfigurationError("schemes", f"cannot parse scheme {token!r}")
    name, lam, ito = m.groups()
    if lam is not None and name != "decentered":
        raise ConfigurationError("schemes", f"only decentered takes @lambda: {token!r}")
    return SchemeSpec(_KIND[name], lam=float(lam) if lam else 0.0, corrected=bool(ito))


def scheme_token(scheme):
    tok = _TOKEN[scheme.kind]
    if scheme.kind == "decentered":
        tok += f"@{scheme.lam:g}"
    return tok + ("+ito" if scheme.corrected else "")


def parse_config(text, source="<config>"):
    model, top = {}, {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigurationError(key, f"duplicate key at {source}:{lineno}")
        seen.add(key)
        try:
            if key in _MODEL_KEYS:
                conv = _MODEL_KEYS[key]
                model[key] = int(value) if conv is int else parse_number(value)
            elif key in _LIST_KEYS:
                items = [v for v in (s.strip() for s in value.split(",")) if v]
                top[key] = [parse_scheme(v) for v in items] if key == "schemes" else [parse_number(v) for v in items]
            elif key in _SCALAR_KEYS:
                conv = _SCALAR_KEYS[key]
                top[key] = value if conv is str else int(value, 0)
            else:
                raise ConfigurationError(key, f"unknown key at {source}:{lineno}")
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(key, f"{exc} at {source}:{lineno}") from None
    kwargs = {"model": ModelConfig(**model)}
    for key in ("alphas", "dts", "schemes", "realizations", "base_seed", "workers"):
        if key in top:
            kwargs[key] = top[key]
    if "output" in top:
        kwargs["output_path"] = top["output"]
    return ExperimentConfig(**kwargs)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text, source=str(path))
