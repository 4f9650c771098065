"""
BusyQ - Distribution Spec Loader
==================================
Turns the textual distribution specifications used by the CLI and the HTTP
API into ServiceDistribution objects, and loads tabulated laws from CSV.

Accepted specifications:
  det:alpha=1                  deterministic
  exp:alpha=1                  exponential
  pow:c=4 | pow:alpha=0.8      power law on [0, 1)
  pareto3:k=0.667 | pareto3:alpha=1     Pareto with shape 3
  paretok:theta=1.667 | paretok:alpha=1 Pareto with scale 0.4
  beta:lambda=1,rho=1,beta=0   constant-β family
  table:path=FILE.csv          piecewise-linear law from columns t,G
"""

import os

import pandas as pd

from busyq.distributions import (
    ServiceDistribution,
    make_beta_family,
    make_deterministic,
    make_exponential,
    make_pareto_fixed_scale,
    make_pareto_fixed_shape,
    make_power,
    make_user_tabulated,
    pareto_fixed_scale_for_mean,
    pareto_fixed_shape_for_mean,
    power_for_mean,
)
from busyq.errors import DistSpecError, ParameterDomainError

# kind -> {accepted parameter sets -> builder}
_BUILDERS = {
    "det": {("alpha",): lambda p: make_deterministic(p["alpha"])},
    "exp": {("alpha",): lambda p: make_exponential(p["alpha"])},
    "pow": {
        ("c",): lambda p: make_power(p["c"]),
        ("alpha",): lambda p: power_for_mean(p["alpha"]),
    },
    "pareto3": {
        ("k",): lambda p: make_pareto_fixed_shape(p["k"]),
        ("alpha",): lambda p: pareto_fixed_shape_for_mean(p["alpha"]),
    },
    "paretok": {
        ("theta",): lambda p: make_pareto_fixed_scale(p["theta"]),
        ("alpha",): lambda p: pareto_fixed_scale_for_mean(p["alpha"]),
    },
    "beta": {
        ("beta", "lambda", "rho"): lambda p: make_beta_family(p["lambda"], p["rho"], p["beta"]),
    },
}

# aliases accepted for parameter names
_PARAM_ALIASES = {"lam": "lambda", "a": "alpha"}


# ===================== SPEC PARSING =====================


def _split_params(kind, body):
    params = {}
    for item in body.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise DistSpecError(kind, f"expected name=value, got {item!r}")
        name, value = (part.strip() for part in item.split("=", 1))
        name = _PARAM_ALIASES.get(name, name)
        if name in params:
            raise DistSpecError(name, "given twice")
        params[name] = value
    return params


def _to_float(name, text):
    try:
        return float(text)
    except ValueError:
        raise DistSpecError(name, f"not a number: {text!r}") from None


def parse_dist_spec(text: str) -> ServiceDistribution:
    """
    Parse a distribution specification such as ``exp:alpha=1``.

    Raises:
        DistSpecError: naming the offending field (kind or parameter)
    """
    if not isinstance(text, str) or ":" not in text:
        raise DistSpecError("kind", f"expected KIND:name=value,..., got {text!r}")
    kind, body = (part.strip() for part in text.split(":", 1))
    kind = kind.lower()

    if kind == "table":
        params = _split_params(kind, body)
        if set(params) != {"path"}:
            raise DistSpecError("path", "table specs take exactly one parameter, path=FILE.csv")
        return load_tabulated_distribution(params["path"])

    if kind not in _BUILDERS:
        known = ", ".join(sorted(list(_BUILDERS) + ["table"]))
        raise DistSpecError("kind", f"unknown distribution {kind!r} (known: {known})")

    raw = _split_params(kind, body)
    builder = _BUILDERS[kind].get(tuple(sorted(raw)))
    if builder is None:
        accepted = " or ".join(",".join(names) for names in _BUILDERS[kind])
        missing = sorted(set(min(_BUILDERS[kind], key=len)) - set(raw))
        field = missing[0] if missing else sorted(raw)[0]
        raise DistSpecError(field, f"{kind} takes parameters {accepted}, got {sorted(raw)}")

    params = {name: _to_float(name, value) for name, value in raw.items()}
    try:
        return builder(params)
    except DistSpecError:
        raise
    except ParameterDomainError as e:
        field = next((name for name in params if name in str(e)), next(iter(params)))
        raise DistSpecError(field, str(e)) from e


# ===================== TABULATED LAWS =====================


def load_tabulated_distribution(path: str) -> ServiceDistribution:
    """
    Load a piecewise-linear service law from a CSV file with columns t, G.

    The rows must start at t = 0 with strictly increasing t, nondecreasing
    G in [0, 1] and a final G of 1.
    """
    if not os.path.exists(path):
        raise DistSpecError("path", f"file not found: {path}")
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DistSpecError("path", f"unreadable CSV {path}: {e}") from e

    df.columns = [str(c).strip() for c in df.columns]
    for column in ("t", "G"):
        if column not in df.columns:
            raise DistSpecError(column, f"column missing from {path}")
    try:
        t = pd.to_numeric(df["t"], errors="raise").to_numpy(dtype=float)
        g = pd.to_numeric(df["G"], errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise DistSpecError("G", f"non-numeric entries in {path}: {e}") from e

    try:
        return make_user_tabulated(t, g)
    except ParameterDomainError as e:
        raise DistSpecError("G" if "G" in str(e) else "t", str(e)) from e
