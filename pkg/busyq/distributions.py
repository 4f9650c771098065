"""
BusyQ - Service-Time Distributions
====================================
The service-time laws fed to the M|G|∞ engines.

Every family exposes, in closed form:
  - survival 1 − G(t) (and its logarithm)
  - the integrated tail I(t) = ∫₀ᵗ[1 − G(v)]dv and its complement mean − I(t)
  - an envelope for the survival tail, used to declare quadrature tail classes
  - exact sampling for the Monte Carlo oracle

All objects are immutable; methods accept floats or numpy arrays.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Optional

import numpy as np

from busyq.errors import ParameterDomainError

# Scale of the fixed-scale Pareto family
PARETO_FIXED_SCALE = 0.4
# Shape of the fixed-shape Pareto family
PARETO_FIXED_SHAPE = 3.0


class DistributionKind(str, Enum):
    DETERMINISTIC = "Deterministic"
    EXPONENTIAL = "Exponential"
    POWER = "Power"
    PARETO_FIXED_SHAPE = "ParetoFixedShape"
    PARETO_FIXED_SCALE = "ParetoFixedScale"
    BETA_FAMILY = "BetaFamily"
    USER_TABULATED = "UserTabulated"


@dataclass(frozen=True)
class SurvivalBound:
    """
    Envelope for the survival function, valid for t ≥ start.

    shape "exponential": 1 − G(t) ≤ coefficient · e^{−rate·t}
    shape "power":       1 − G(t) ≤ coefficient · t^{−rate}
    """
    shape: str
    coefficient: float
    rate: float
    start: float = 0.0


def _out(values):
    """Return a python float for 0-d input, the array otherwise."""
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterDomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


class ServiceDistribution(ABC):
    """Common interface of the service-time families."""

    kind: ClassVar[DistributionKind]

    # ---------- parameters ----------

    @property
    @abstractmethod
    def mean(self) -> float:
        """α, the mean service time."""

    @property
    def support_upper(self) -> float:
        return math.inf

    @property
    def atom_at_zero(self) -> float:
        return 0.0

    @property
    def breakpoints(self) -> tuple:
        """Points where the survival function is not smooth."""
        return ()

    @property
    def tail_index(self) -> float:
        """θ such that 1 − G(t) ~ t^{−θ}; ∞ for lighter tails."""
        return math.inf

    @property
    def degenerate(self) -> bool:
        return False

    @abstractmethod
    def parameters(self) -> dict:
        """Kind-specific parameters, as passed to the constructor."""

    @property
    def label(self) -> str:
        params = ",".join(f"{k}={v:g}" for k, v in self.parameters().items())
        return f"{self.kind.value}({params})"

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "parameters": self.parameters(),
            "mean": self.mean,
            "support_upper": self.support_upper,
            "atom_at_zero": self.atom_at_zero,
        }

    # ---------- functions of t ----------

    @abstractmethod
    def survival(self, t):
        """1 − G(t)."""

    def log_survival(self, t):
        with np.errstate(divide="ignore"):
            return _out(np.log(np.asarray(self.survival(t), dtype=float)))

    def cdf(self, t):
        return _out(1.0 - np.asarray(self.survival(t), dtype=float))

    @abstractmethod
    def integrated_tail(self, t):
        """I(t) = ∫₀ᵗ[1 − G(v)]dv."""

    def residual_tail(self, t):
        """mean − I(t) = ∫ₜ^∞[1 − G(v)]dv."""
        return _out(np.maximum(self.mean - np.asarray(self.integrated_tail(t)), 0.0))

    def survival_bound(self) -> Optional[SurvivalBound]:
        """Tail envelope; None when the support is bounded."""
        return None

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw i.i.d. service times."""


# ===================== Bounded-support families =====================


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    """Constant service time α."""

    alpha: float
    kind: ClassVar[DistributionKind] = DistributionKind.DETERMINISTIC

    def __post_init__(self):
        object.__setattr__(self, "alpha", _require_positive("alpha", self.alpha))

    @property
    def mean(self) -> float:
        return self.alpha

    @property
    def support_upper(self) -> float:
        return self.alpha

    @property
    def breakpoints(self) -> tuple:
        return (self.alpha,)

    def parameters(self) -> dict:
        return {"alpha": self.alpha}

    def survival(self, t):
        return _out(np.where(np.asarray(t, dtype=float) < self.alpha, 1.0, 0.0))

    def integrated_tail(self, t):
        return _out(np.minimum(np.asarray(t, dtype=float), self.alpha))

    def residual_tail(self, t):
        return _out(np.maximum(self.alpha - np.asarray(t, dtype=float), 0.0))

    def sample(self, rng, size):
        return np.full(size, self.alpha)


@dataclass(frozen=True)
class Power(ServiceDistribution):
    """G(t) = tᶜ on [0, 1)."""

    c: float
    kind: ClassVar[DistributionKind] = DistributionKind.POWER

    def __post_init__(self):
        object.__setattr__(self, "c", _require_positive("c", self.c))

    @property
    def mean(self) -> float:
        return self.c / (self.c + 1.0)

    @property
    def support_upper(self) -> float:
        return 1.0

    @property
    def breakpoints(self) -> tuple:
        return (1.0,)

    def parameters(self) -> dict:
        return {"c": self.c}

    def survival(self, t):
        tt = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return _out(1.0 - tt ** self.c)

    def integrated_tail(self, t):
        tt = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return _out(tt - tt ** (self.c + 1.0) / (self.c + 1.0))

    def residual_tail(self, t):
        tt = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        c = self.c
        return _out(np.maximum((c - (c + 1.0) * tt + tt ** (c + 1.0)) / (c + 1.0), 0.0))

    def sample(self, rng, size):
        return rng.random(size) ** (1.0 / self.c)


@dataclass(frozen=True)
class UserTabulated(ServiceDistribution):
    """
    Piecewise-linear G from (t, G(t)) pairs.

    t must start at 0 and increase strictly; G must be nondecreasing in
    [0, 1] and reach 1 at the last point. The integrated tail is the exact
    integral of the interpolant (trapezoid rule on the knots).
    """

    times: tuple
    values: tuple
    kind: ClassVar[DistributionKind] = DistributionKind.USER_TABULATED
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _s: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        g = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or t.size < 2:
            raise ParameterDomainError("tabulated distribution needs at least two (t, G) pairs")
        if t[0] != 0.0:
            raise ParameterDomainError(f"first tabulated time must be 0, got {t[0]!r}")
        if np.any(np.diff(t) <= 0.0):
            raise ParameterDomainError("tabulated times must be strictly increasing")
        if np.any(g < 0.0) or np.any(g > 1.0):
            raise ParameterDomainError("tabulated G values must lie in [0, 1]")
        if np.any(np.diff(g) < 0.0):
            raise ParameterDomainError("tabulated G values must be nondecreasing")
        if g[-1] != 1.0:
            raise ParameterDomainError(f"last tabulated G value must be 1, got {g[-1]!r}")
        if g[0] == 1.0:
            raise ParameterDomainError("tabulated law has zero mean (G(0) = 1)")
        s = 1.0 - g
        cum = np.concatenate(([0.0], np.cumsum(np.diff(t) * (s[:-1] + s[1:]) / 2.0)))
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(g.tolist()))
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_s", s)
        object.__setattr__(self, "_cum", cum)

    @property
    def mean(self) -> float:
        return float(self._cum[-1])

    @property
    def support_upper(self) -> float:
        return float(self._t[np.argmax(self._s <= 0.0)])

    @property
    def atom_at_zero(self) -> float:
        return float(1.0 - self._s[0])

    @property
    def breakpoints(self) -> tuple:
        knots = self._t[1:]
        if knots.size > 100:
            knots = knots[np.linspace(0, knots.size - 1, 100).astype(int)]
        return tuple(float(k) for k in knots)

    def parameters(self) -> dict:
        return {"points": len(self.times)}

    def survival(self, t):
        return _out(np.interp(np.asarray(t, dtype=float), self._t, self._s, right=0.0))

    def integrated_tail(self, t):
        t = np.asarray(t, dtype=float)
        tc = np.minimum(t, self._t[-1])
        idx = np.clip(np.searchsorted(self._t, tc, side="right") - 1, 0, self._t.size - 2)
        s_at = np.interp(tc, self._t, self._s)
        return _out(self._cum[idx] + (tc - self._t[idx]) * (self._s[idx] + s_at) / 2.0)

    def sample(self, rng, size):
        g, first = np.unique(1.0 - self._s, return_index=True)
        return np.interp(rng.random(size), g, self._t[first])


# ===================== Unbounded families =====================


@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    """G(t) = 1 − e^{−t/α}."""

    alpha: float
    kind: ClassVar[DistributionKind] = DistributionKind.EXPONENTIAL

    def __post_init__(self):
        object.__setattr__(self, "alpha", _require_positive("alpha", self.alpha))

    @property
    def mean(self) -> float:
        return self.alpha

    def parameters(self) -> dict:
        return {"alpha": self.alpha}

    def survival(self, t):
        return _out(np.exp(-np.asarray(t, dtype=float) / self.alpha))

    def log_survival(self, t):
        return _out(-np.asarray(t, dtype=float) / self.alpha)

    def integrated_tail(self, t):
        return _out(-self.alpha * np.expm1(-np.asarray(t, dtype=float) / self.alpha))

    def residual_tail(self, t):
        return _out(self.alpha * np.exp(-np.asarray(t, dtype=float) / self.alpha))

    def survival_bound(self):
        return SurvivalBound("exponential", 1.0, 1.0 / self.alpha)

    def sample(self, rng, size):
        return rng.exponential(self.alpha, size)


class _ParetoTail(ServiceDistribution):
    """1 − G(t) = (x/t)^θ for t ≥ x, evaluated in log space."""

    @property
    @abstractmethod
    def scale(self) -> float:
        ...

    @property
    @abstractmethod
    def shape(self) -> float:
        ...

    @property
    def mean(self) -> float:
        return self.scale * self.shape / (self.shape - 1.0)

    @property
    def breakpoints(self) -> tuple:
        return (self.scale,)

    @property
    def tail_index(self) -> float:
        return self.shape

    def _log_ratio(self, t):
        # ln x − ln max(t, x), zero below the scale
        tt = np.maximum(np.asarray(t, dtype=float), self.scale)
        return math.log(self.scale) - np.log(tt)

    def survival(self, t):
        return _out(np.exp(self.shape * self._log_ratio(t)))

    def log_survival(self, t):
        return _out(self.shape * self._log_ratio(t))

    def integrated_tail(self, t):
        t = np.asarray(t, dtype=float)
        x, th = self.scale, self.shape
        above = x - x * np.expm1((th - 1.0) * self._log_ratio(t)) / (th - 1.0)
        return _out(np.where(t < x, t, above))

    def residual_tail(self, t):
        t = np.asarray(t, dtype=float)
        x, th = self.scale, self.shape
        above = x / (th - 1.0) * np.exp((th - 1.0) * self._log_ratio(t))
        return _out(np.where(t < x, self.mean - t, above))

    def survival_bound(self):
        return SurvivalBound("power", self.scale ** self.shape, self.shape, self.scale)

    def sample(self, rng, size):
        u = 1.0 - rng.random(size)
        return self.scale * np.exp(-np.log(u) / self.shape)


@dataclass(frozen=True)
class ParetoFixedShape(_ParetoTail):
    """1 − G(t) = (k/t)³ for t ≥ k."""

    k: float
    kind: ClassVar[DistributionKind] = DistributionKind.PARETO_FIXED_SHAPE

    def __post_init__(self):
        object.__setattr__(self, "k", _require_positive("k", self.k))

    @property
    def scale(self) -> float:
        return self.k

    @property
    def shape(self) -> float:
        return PARETO_FIXED_SHAPE

    def parameters(self) -> dict:
        return {"k": self.k}


@dataclass(frozen=True)
class ParetoFixedScale(_ParetoTail):
    """1 − G(t) = (0.4/t)^θ for t ≥ 0.4."""

    theta: float
    kind: ClassVar[DistributionKind] = DistributionKind.PARETO_FIXED_SCALE

    def __post_init__(self):
        theta = float(self.theta)
        if not math.isfinite(theta) or theta <= 1.0:
            raise ParameterDomainError(f"theta must exceed 1 (finite mean), got {theta!r}")
        object.__setattr__(self, "theta", theta)

    @property
    def scale(self) -> float:
        return PARETO_FIXED_SCALE

    @property
    def shape(self) -> float:
        return self.theta

    def parameters(self) -> dict:
        return {"theta": self.theta}


@dataclass(frozen=True)
class BetaFamily(ServiceDistribution):
    """
    The constant-β service collection, parameterized by (λ, ρ, β).

    1 − G(t) = w / (d + e^{(λ+β)t − ρ}) with d = 1 − e^{−ρ} and
    w = (λ+β)d/λ, so that G(0) = 1 − w is an atom at the origin and the
    mean is ρ/λ for every admissible β.

    At β = −λ the law collapses to G ≡ 1 (flagged `degenerate`); its
    nominal mean stays ρ/λ, the common value of the whole family.
    """

    lam: float
    rho: float
    beta: float = 0.0
    kind: ClassVar[DistributionKind] = DistributionKind.BETA_FAMILY

    def __post_init__(self):
        lam = _require_positive("lambda", self.lam)
        rho = _require_positive("rho", self.rho)
        beta = float(self.beta)
        upper = beta_upper_bound(lam, rho)
        if not math.isfinite(beta) or beta < -lam or beta > upper * (1.0 + 1e-12):
            raise ParameterDomainError(
                f"beta={beta!r} outside the admissible band [{-lam!r}, {upper!r}]"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "beta", min(beta, upper))

    # a = λ + β, the exponential rate of the survival tail
    @property
    def rate(self) -> float:
        return max(self.lam + self.beta, 0.0)

    @property
    def weight(self) -> float:
        """w = (λ+β)(1 − e^{−ρ})/λ, the continuous mass."""
        return min(self.rate * -math.expm1(-self.rho) / self.lam, 1.0)

    @property
    def degenerate(self) -> bool:
        return self.rate <= 1e-15 * self.lam

    @property
    def mean(self) -> float:
        return self.rho / self.lam

    @property
    def atom_at_zero(self) -> float:
        return max(1.0 - self.weight, 0.0)

    @property
    def breakpoints(self) -> tuple:
        if self.degenerate:
            return ()
        return (self.rho / self.rate,)

    def parameters(self) -> dict:
        return {"lambda": self.lam, "rho": self.rho, "beta": self.beta}

    def _log_denominator(self, t):
        # log(d + e^{at − ρ})
        t = np.asarray(t, dtype=float)
        return np.logaddexp(math.log(-math.expm1(-self.rho)), self.rate * t - self.rho)

    def survival(self, t):
        if self.degenerate:
            return _out(np.zeros_like(np.asarray(t, dtype=float)))
        return _out(np.exp(math.log(self.weight) - self._log_denominator(t)))

    def log_survival(self, t):
        if self.degenerate:
            return _out(np.full_like(np.asarray(t, dtype=float), -np.inf))
        return _out(math.log(self.weight) - self._log_denominator(t))

    def integrated_tail(self, t):
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return _out(np.zeros_like(t))
        value = (self.rate * t - self._log_denominator(t)) / self.lam
        return _out(np.maximum(value, 0.0))

    def residual_tail(self, t):
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return _out(np.zeros_like(t))
        d = -math.expm1(-self.rho)
        return _out(np.logaddexp(0.0, math.log(d) + self.rho - self.rate * t) / self.lam)

    def survival_bound(self):
        if self.degenerate:
            return None
        log_coefficient = math.log(self.weight) + self.rho
        return SurvivalBound("exponential", math.exp(min(log_coefficient, 700.0)), self.rate)

    def sample(self, rng, size):
        u = rng.random(size)
        if self.degenerate:
            return np.zeros(size)
        atom = self.atom_at_zero
        d = -math.expm1(-self.rho)
        # conditional survival of the continuous part is 1/(d + e^{at − ρ})
        v = 1.0 - (u - atom) / self.weight
        with np.errstate(divide="ignore", invalid="ignore"):
            cont = (self.rho + np.log(1.0 / v - d)) / self.rate
        return np.where(u < atom, 0.0, np.maximum(cont, 0.0))


def beta_upper_bound(lam: float, rho: float) -> float:
    """λ/(e^ρ − 1), the upper end of the admissible β band."""
    return lam / math.expm1(rho)


# ===================== Queue Configuration =====================


@dataclass(frozen=True)
class QueueConfig:
    """Arrival rate λ plus a service law; ρ = λα is always derived."""

    lam: float
    service: ServiceDistribution

    def __post_init__(self):
        lam = _require_positive("lambda", self.lam)
        object.__setattr__(self, "lam", lam)
        if isinstance(self.service, BetaFamily) and not math.isclose(
            lam, self.service.lam, rel_tol=1e-12
        ):
            raise ParameterDomainError(
                f"lambda={lam!r} differs from the beta-family lambda={self.service.lam!r}"
            )

    @property
    def rho(self) -> float:
        return self.lam * self.service.mean

    @classmethod
    def from_rho(cls, service: ServiceDistribution, rho: float) -> "QueueConfig":
        """Choose λ = ρ/α."""
        return cls(_require_positive("rho", rho) / service.mean, service)


# ===================== Factory Functions =====================


def make_deterministic(alpha: float) -> Deterministic:
    return Deterministic(alpha)


def make_exponential(alpha: float) -> Exponential:
    return Exponential(alpha)


def make_power(c: float) -> Power:
    return Power(c)


def make_pareto_fixed_shape(k: float) -> ParetoFixedShape:
    return ParetoFixedShape(k)


def make_pareto_fixed_scale(theta: float) -> ParetoFixedScale:
    return ParetoFixedScale(theta)


def make_beta_family(lam: float, rho: float, beta: float) -> BetaFamily:
    return BetaFamily(lam, rho, beta)


def make_user_tabulated(times, values) -> UserTabulated:
    return UserTabulated(tuple(np.asarray(times, dtype=float).tolist()),
                         tuple(np.asarray(values, dtype=float).tolist()))


def power_for_mean(alpha: float) -> Power:
    """Power law with mean α (needs 0 < α < 1): c = α/(1 − α)."""
    alpha = _require_positive("alpha", alpha)
    if alpha >= 1.0:
        raise ParameterDomainError(f"power-law mean must be below 1, got {alpha!r}")
    return Power(alpha / (1.0 - alpha))


def pareto_fixed_shape_for_mean(alpha: float) -> ParetoFixedShape:
    """Fixed-shape Pareto with mean α: k = 2α/3."""
    return ParetoFixedShape(2.0 * _require_positive("alpha", alpha) / 3.0)


def pareto_fixed_scale_for_mean(alpha: float) -> ParetoFixedScale:
    """Fixed-scale Pareto with mean α (needs α > 0.4): θ = α/(α − 0.4)."""
    alpha = _require_positive("alpha", alpha)
    if alpha <= PARETO_FIXED_SCALE:
        raise ParameterDomainError(f"fixed-scale Pareto mean must exceed 0.4, got {alpha!r}")
    return ParetoFixedScale(alpha / (alpha - PARETO_FIXED_SCALE))


# ===================== Evaluation =====================


def _check_time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise ParameterDomainError("t must be nonnegative")
    return t


def cdf(dist: ServiceDistribution, t):
    """G(t) for t ≥ 0."""
    return dist.cdf(_check_time(t))


def integrated_tail(dist: ServiceDistribution, t):
    """∫₀ᵗ[1 − G(v)]dv for t ≥ 0."""
    return dist.integrated_tail(_check_time(t))
