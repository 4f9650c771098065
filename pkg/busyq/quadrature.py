"""
BusyQ - Quadrature Module
===========================
Adaptive Gauss-Kronrod integration (QUADPACK through scipy.integrate.quad)
for finite and semi-infinite ranges.

Semi-infinite integrals are truncated at a horizon T chosen from an analytic
bound on the discarded tail. The caller declares the tail class of its
integrand:
  - ExponentialTail:        f(t) ≤ C · tᵐ · e^{−r t}
  - PowerTail:              f(t) ≤ C · tᵖ for t ≥ start
  - PlateauTimesPowerTail:  f(t) ≤ plateau · C · tᵖ for t ≥ start
A power tail with p ≥ −1 is divergent; the tail policy then decides between
raising and integrating up to the horizon cap with a warning.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaincc, gammaln

from busyq.config import (
    GEOMETRIC_FIRST_POINT,
    GEOMETRIC_RATIO,
    HORIZON_CAP,
    QUAD_ABS_TOL,
    QUAD_MAX_SUBDIVISIONS,
    QUAD_REL_TOL,
)
from busyq.errors import DivergenceError, ParameterDomainError, QuadratureAccuracyError

logger = logging.getLogger(__name__)

DIVERGENT = "divergent"


class TailPolicy(str, Enum):
    ERROR_IF_DIVERGENT = "error"
    TRUNCATE_AND_WARN = "truncate"


class QuadratureSettings(BaseModel):
    """Tolerances and truncation control shared by every integral."""

    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=QUAD_REL_TOL, gt=0, description="Relative tolerance")
    abs_tol: float = Field(default=QUAD_ABS_TOL, gt=0, description="Absolute tolerance")
    max_subdivisions: int = Field(
        default=QUAD_MAX_SUBDIVISIONS, ge=1, description="Subinterval budget per integral"
    )
    truncation_horizon: Union[Literal["auto"], PositiveFloat] = Field(
        default="auto", description="Upper limit substituted for ∞, or 'auto'"
    )
    tail_policy: TailPolicy = Field(
        default=TailPolicy.ERROR_IF_DIVERGENT, description="Behavior on divergent tails"
    )
    horizon_cap: PositiveFloat = Field(
        default=HORIZON_CAP, description="Largest horizon the 'auto' search may pick"
    )


class QuadratureResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    est_error: NonNegativeFloat
    truncated_tail_bound: Union[NonNegativeFloat, Literal["divergent"]] = 0.0
    subdivisions_used: int = 0
    horizon: Optional[float] = None
    warnings: tuple = ()

    @property
    def divergent(self) -> bool:
        return self.truncated_tail_bound == DIVERGENT


# ===================== Tail Classes =====================


@dataclass(frozen=True)
class ExponentialTail:
    rate: float
    power: float = 0.0
    coefficient: float = 1.0

    divergent = False

    def bound(self, horizon: float) -> float:
        """C ∫_T^∞ tᵐ e^{−rt} dt = C Γ(m+1, rT) / r^{m+1}."""
        m1 = self.power + 1.0
        upper = gammaincc(m1, self.rate * horizon)
        if upper <= 0.0 or self.coefficient <= 0.0:
            return 0.0
        log_bound = (math.log(self.coefficient) + gammaln(m1) + math.log(upper)
                     - m1 * math.log(self.rate))
        return math.exp(min(log_bound, 700.0))


@dataclass(frozen=True)
class PowerTail:
    """f(t) ≤ C tᵖ for t ≥ start."""

    exponent: float
    coefficient: float = 1.0
    start: float = 0.0

    @property
    def divergent(self) -> bool:
        return self.exponent >= -1.0

    @property
    def _scale(self) -> float:
        return self.coefficient

    def bound(self, horizon: float) -> float:
        """C ∫_T^∞ tᵖ dt = C T^{p+1} / (−p − 1); unbounded below start."""
        if self.divergent or horizon < self.start:
            return math.inf
        p1 = self.exponent + 1.0
        if self._scale <= 0.0:
            return 0.0
        log_bound = math.log(self._scale) + p1 * math.log(horizon) - math.log(-p1)
        return math.exp(min(log_bound, 700.0))

    def horizon_for(self, tol: float) -> float:
        p1 = self.exponent + 1.0
        if self._scale <= 0.0:
            return self.start
        log_t = (math.log(-p1) + math.log(tol) - math.log(self._scale)) / p1
        return max(self.start, math.exp(min(log_t, 700.0)))


@dataclass(frozen=True)
class PlateauTimesPowerTail(PowerTail):
    plateau: float = 1.0

    @property
    def _scale(self) -> float:
        return self.plateau * self.coefficient


TailClass = Union[ExponentialTail, PowerTail, PlateauTimesPowerTail]


# ===================== Helpers =====================


def geometric_breakpoints(a: float, b: float, first: float = GEOMETRIC_FIRST_POINT,
                          ratio: float = GEOMETRIC_RATIO) -> tuple:
    """first · ratioʲ strictly inside (a, b); keeps QUADPACK from missing early peaks."""
    points = []
    x = first
    while x < b:
        if x > a:
            points.append(x)
        x *= ratio
    return tuple(points)


def _exponential_horizon(decay: ExponentialTail, a: float, tol: float, cap: float) -> float:
    if decay.bound(cap) >= tol:
        return cap
    start = max(a, 1.0 / decay.rate, 1e-12)
    if decay.bound(start) < tol:
        return start

    def excess(t):
        return math.log(max(decay.bound(t), 1e-300)) - math.log(tol)

    hi = start
    while excess(hi) > 0.0 and hi < cap:
        hi = min(2.0 * hi, cap)
    xtol = 1e-9 * hi
    # step past the root so the bound lands strictly below tol
    return min(brentq(excess, start, hi, xtol=xtol) + 2.0 * xtol, cap)


# ===================== Integration =====================


def integrate_finite(f: Callable[[float], float], a: float, b: float,
                     settings: Optional[QuadratureSettings] = None,
                     points: Iterable[float] = ()) -> QuadratureResult:
    """
    ∫ₐᵇ f(t) dt by adaptive Gauss-Kronrod.

    Args:
        f: scalar integrand
        a, b: finite limits, a ≤ b
        settings: tolerances and subdivision budget
        points: known non-smooth points (support edges, Pareto scale, α)

    Returns:
        QuadratureResult with truncated_tail_bound = 0

    Raises:
        QuadratureAccuracyError when the subdivision budget runs out
    """
    settings = settings or QuadratureSettings()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterDomainError("integrate_finite needs finite limits")
    if b < a:
        raise ParameterDomainError(f"lower limit {a!r} exceeds upper limit {b!r}")
    if a == b:
        return QuadratureResult(value=0.0, est_error=0.0)

    interior = sorted({float(p) for p in points if a < p < b})
    limit = max(settings.max_subdivisions, len(interior) + 2)
    out = quad(
        f, a, b,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=limit,
        points=interior or None,
        full_output=1,
    )
    value, est_error, info = out[0], out[1], out[2]
    used = int(info.get("last", 0))
    warnings = []

    if len(out) > 3:
        message = str(out[3]).strip().splitlines()[0]
        if used >= limit or "maximum number of subdivisions" in message:
            raise QuadratureAccuracyError(
                f"subdivision budget {limit} exhausted on [{a:g}, {b:g}]", value, est_error
            )
        target = max(settings.abs_tol, settings.rel_tol * abs(value))
        if est_error > target:
            warnings.append(f"quadrature on [{a:g}, {b:g}]: {message}")
            logger.warning(warnings[-1])

    if not math.isfinite(value):
        raise QuadratureAccuracyError(f"non-finite integral on [{a:g}, {b:g}]", value, est_error)

    return QuadratureResult(
        value=value,
        est_error=abs(est_error),
        subdivisions_used=used,
        horizon=b,
        warnings=tuple(warnings),
    )


def integrate_semi_infinite(f: Callable[[float], float], a: float, decay: TailClass,
                            settings: Optional[QuadratureSettings] = None,
                            points: Sequence[float] = (),
                            horizon_cap: Optional[float] = None,
                            order: Optional[int] = None) -> QuadratureResult:
    """
    ∫ₐ^∞ f(t) dt, truncated at a horizon backed by the tail class bound.

    Args:
        f: scalar integrand
        a: lower limit
        decay: tail class of f
        settings: tolerances, horizon and tail policy
        points: known non-smooth points
        horizon_cap: largest horizon, in the integrand's units
            (defaults to settings.horizon_cap)
        order: moment order the integral feeds, named in divergence errors

    Returns:
        QuadratureResult whose truncated_tail_bound is the analytic bound on
        ∫_T^∞ f, or "divergent"
    """
    settings = settings or QuadratureSettings()
    cap = horizon_cap if horizon_cap is not None else settings.horizon_cap
    explicit = settings.truncation_horizon != "auto"
    warnings = []

    if decay.divergent:
        if settings.tail_policy is TailPolicy.ERROR_IF_DIVERGENT:
            raise DivergenceError(
                order if order is not None else 0,
                f"integrand tail ~ t^{decay.exponent:g} is not integrable",
            )
        horizon = float(settings.truncation_horizon) if explicit else cap
        warnings.append(
            f"divergent tail (t^{decay.exponent:g}) truncated at horizon {horizon:g}"
            + (f" for E[B^{order}]" if order is not None else "")
        )
        logger.warning(warnings[-1])
        tail_bound = DIVERGENT
    else:
        if explicit:
            horizon = float(settings.truncation_horizon)
        elif isinstance(decay, ExponentialTail):
            horizon = _exponential_horizon(decay, a, settings.abs_tol, cap)
        else:
            horizon = min(decay.horizon_for(settings.abs_tol), cap)
        horizon = max(horizon, a)
        tail_bound = decay.bound(horizon) if horizon > 0.0 else math.inf
        if tail_bound >= settings.abs_tol:
            warnings.append(
                f"horizon {horizon:g} leaves a tail bound of {tail_bound:.3g}"
                " above the absolute tolerance"
            )
            logger.warning(warnings[-1])

    result = integrate_finite(
        f, a, horizon, settings,
        points=tuple(points) + geometric_breakpoints(a, horizon),
    )
    return QuadratureResult(
        value=result.value,
        est_error=result.est_error,
        truncated_tail_bound=tail_bound,
        subdivisions_used=result.subdivisions_used,
        horizon=horizon,
        warnings=tuple(warnings) + result.warnings,
    )
