"""
BusyQ - Busy-Period Moments
=============================
Raw moments E[Bⁿ] of the M|G|∞ busy period and their shape coefficients.

Engines:
  1. Closed form for the constant-β service family (G₁ when β = 0)
  2. Moment recurrence over the kernel derivatives
       Dₙ = ∫₀^∞ tⁿ e^{−λI(t)} λ(1 − G(t)) dt
     with Dₙ exact for deterministic service and by quadrature otherwise

The recurrence is run in its all-positive form

    E[Bⁿ] = e^ρ [ (n/λ) D_{n−1} + Σ_{p=1}^{n−1} C(n,p) E[B^{n−p}] D_p ]

in log space, so moments far beyond the float range (E[B⁸] ≈ 10³⁵² at
ρ = 100) stay representable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp

from busyq.distributions import (
    BetaFamily,
    Deterministic,
    QueueConfig,
    ServiceDistribution,
)
from busyq.errors import DegenerateDistributionError, DivergenceError, ParameterDomainError
from busyq.quadrature import (
    ExponentialTail,
    PlateauTimesPowerTail,
    QuadratureSettings,
    geometric_breakpoints,
    integrate_finite,
    integrate_semi_infinite,
)

logger = logging.getLogger(__name__)

LN10 = math.log(10.0)


class Provenance(str, Enum):
    CLOSED_FORM_G1 = "ClosedFormG1"
    CLOSED_FORM_BETA = "ClosedFormBeta"
    RECURRENCE_ANALYTIC_C = "RecurrenceAnalyticC"
    RECURRENCE_QUADRATURE_C = "RecurrenceQuadratureC"
    EXPONENTIAL_REFERENCE = "ExponentialReference"
    MONTE_CARLO = "MonteCarlo"


class CSource(str, Enum):
    ANALYTIC_DETERMINISTIC = "AnalyticDeterministic"
    QUADRATURE = "Quadrature"


# ===================== Value Types =====================


@dataclass(frozen=True)
class CDerivatives:
    """Dₙ = (−1)ⁿ C⁽ⁿ⁾(0) for n = 0..N−1."""

    lam: float
    rho: float
    d: tuple
    source: CSource
    divergent_from: Optional[int] = None
    tail_bounds: tuple = ()
    warnings: tuple = ()

    @property
    def n_max(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class MomentSet:
    """
    E[B¹..Bᴺ] as natural-log magnitudes plus signs.

    `divergent_from` is the smallest order whose moment is infinite; values
    at and above it are truncation-horizon dependent "effective" moments.
    """

    lam: Optional[float]
    rho: Optional[float]
    log_moments: tuple
    provenance: Provenance
    signs: tuple = ()
    divergent_from: Optional[int] = None
    degenerate: bool = False
    warnings: tuple = ()

    def __post_init__(self):
        if not self.signs:
            object.__setattr__(self, "signs", (1,) * len(self.log_moments))

    @property
    def n_max(self) -> int:
        return len(self.log_moments)

    def _check_order(self, n: int):
        if not 1 <= n <= self.n_max:
            raise ParameterDomainError(f"moment order {n} outside 1..{self.n_max}")

    def log_moment(self, n: int) -> float:
        self._check_order(n)
        return self.log_moments[n - 1]

    def log10_moment(self, n: int) -> float:
        return self.log_moment(n) / LN10

    def moment(self, n: int) -> float:
        """E[Bⁿ] as a float; inf beyond the float range."""
        log_value = self.log_moment(n)
        if log_value > 709.78:
            return math.inf
        return self.signs[n - 1] * math.exp(log_value)

    def is_divergent(self, n: int) -> bool:
        return self.divergent_from is not None and n >= self.divergent_from

    def scientific(self, n: int, digits: int = 8) -> str:
        """Mantissa/exponent rendering straight from the log magnitude."""
        log_value = self.log_moment(n)
        if log_value == -math.inf:
            return "0"
        log10_value = log_value / LN10
        exponent = math.floor(log10_value)
        mantissa = round(10.0 ** (log10_value - exponent), digits - 1)
        if mantissa >= 10.0:
            mantissa /= 10.0
            exponent += 1
        sign = "-" if self.signs[n - 1] < 0 else ""
        return f"{sign}{mantissa:.{digits - 1}f}e{exponent:+03d}"

    def ratio_to(self, reference: "MomentSet") -> tuple:
        """E[Bⁿ]/E[Xⁿ] for the orders both sets carry."""
        n = min(self.n_max, reference.n_max)
        return tuple(
            math.exp(self.log_moments[k] - reference.log_moments[k]) for k in range(n)
        )

    def lyapunov_ok(self, rel_slack: float = 1e-12) -> bool:
        """(E[Bᵐ])^{1/m} ≤ (E[Bⁿ])^{1/n} for m ≤ n below divergent_from."""
        top = self.n_max if self.divergent_from is None else min(self.n_max, self.divergent_from - 1)
        scaled = [self.log_moments[k] / (k + 1) for k in range(top)]
        return all(
            scaled[k] <= scaled[k + 1] + rel_slack * max(1.0, abs(scaled[k + 1]))
            for k in range(top - 1)
        )

    def to_records(self) -> list:
        records = []
        for n in range(1, self.n_max + 1):
            value = self.moment(n)
            records.append({
                "n": n,
                "moment": self.scientific(n),
                "value": value if math.isfinite(value) else None,
                "log_moment": self.log_moments[n - 1],
                "log10_moment": self.log10_moment(n),
                "divergent": self.is_divergent(n),
            })
        return records


@dataclass(frozen=True)
class ShapeStats:
    """(δ₁, δ₂, δ₃): coefficient of variation, Pearson β₁, Pearson β₂."""

    delta1: float
    delta2: float
    delta3: float
    divergent: bool = False

    def distance_from_exponential(self) -> float:
        return max(abs(self.delta1 - 1.0), abs(self.delta2 - 4.0), abs(self.delta3 - 9.0))

    def as_dict(self) -> dict:
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "divergent": self.divergent,
        }


# ===================== Helpers =====================


def _require_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterDomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _require_order(n_max):
    if int(n_max) != n_max or n_max < 1:
        raise ParameterDomainError(f"n_max must be a positive integer, got {n_max!r}")
    return int(n_max)


def _log_binom(n: int, p: int) -> float:
    if n <= 170:
        return math.log(math.comb(n, p))
    return gammaln(n + 1) - gammaln(p + 1) - gammaln(n - p + 1)


def mean_busy_period(lam: float, rho: float) -> float:
    """E[B] = (e^ρ − 1)/λ, whatever the service law."""
    return math.expm1(rho) / lam


# ===================== Closed Forms =====================


def closed_moments_g1(lam: float, rho: float, n_max: int) -> MomentSet:
    """E[Bⁿ] = (1 − e^{−ρ}) n! / (λe^{−ρ})ⁿ for G₁ service (β = 0)."""
    lam = _require_positive("lambda", lam)
    rho = _require_positive("rho", rho)
    n = np.arange(1, _require_order(n_max) + 1, dtype=float)
    log_moments = math.log(-math.expm1(-rho)) + gammaln(n + 1.0) + n * (rho - math.log(lam))
    return MomentSet(lam, rho, tuple(float(v) for v in log_moments), Provenance.CLOSED_FORM_G1)


def closed_moments_beta(lam: float, rho: float, beta: float, n_max: int) -> MomentSet:
    """
    E[Bⁿ] = w n!/θⁿ for the mixture busy period of constant-β service,
    w = (λ+β)(1 − e^{−ρ})/λ, θ = e^{−ρ}(λ+β).

    β = −λ gives the degenerate law B ≡ 0: every moment is zero and the set
    is flagged `degenerate`.
    """
    service = BetaFamily(lam, rho, beta)
    n_max = _require_order(n_max)
    lam, rho, beta = service.lam, service.rho, service.beta
    if service.degenerate:
        logger.warning("beta = -lambda: busy period is identically zero")
        return MomentSet(
            lam, rho, (-math.inf,) * n_max, Provenance.CLOSED_FORM_BETA,
            degenerate=True, warnings=("degenerate service law: all moments are zero",),
        )
    a = lam + beta
    n = np.arange(1, n_max + 1, dtype=float)
    log_weight = math.log(-math.expm1(-rho)) + math.log(a / lam)
    log_moments = log_weight + gammaln(n + 1.0) - n * (math.log(a) - rho)
    return MomentSet(lam, rho, tuple(float(v) for v in log_moments), Provenance.CLOSED_FORM_BETA)


def exponential_reference_moments(mu: float, n_max: int, lam: Optional[float] = None,
                                  rho: Optional[float] = None) -> MomentSet:
    """E[Xⁿ] = n! μⁿ for the exponential law of mean μ."""
    mu = _require_positive("mu", mu)
    n = np.arange(1, _require_order(n_max) + 1, dtype=float)
    log_moments = gammaln(n + 1.0) + n * math.log(mu)
    return MomentSet(lam, rho, tuple(float(v) for v in log_moments),
                     Provenance.EXPONENTIAL_REFERENCE)


# ===================== Kernel Derivatives =====================


def deterministic_c_derivative_closed(lam: float, alpha: float, n: int) -> float:
    """Dₙ = n! λ^{−n} P(n+1, ρ) for constant service α (regularized lower gamma)."""
    rho = lam * alpha
    return math.exp(gammaln(n + 1.0) - n * math.log(lam)) * float(gammainc(n + 1.0, rho))


def c_derivatives_deterministic(lam: float, alpha: float, n_max: int) -> CDerivatives:
    """
    D₀ = 1 − e^{−ρ},  Dₙ = (n/λ) D_{n−1} − e^{−ρ} αⁿ.

    When the subtraction would cancel more than six digits the incomplete
    gamma form is used for that order instead.
    """
    lam = _require_positive("lambda", lam)
    alpha = _require_positive("alpha", alpha)
    n_max = _require_order(n_max)
    rho = lam * alpha
    d = [-math.expm1(-rho)]
    for n in range(1, n_max):
        carried = (n / lam) * d[-1]
        nxt = carried - math.exp(-rho + n * math.log(alpha))
        if nxt <= 1e-6 * carried:
            nxt = deterministic_c_derivative_closed(lam, alpha, n)
        d.append(nxt)
    return CDerivatives(lam, rho, tuple(d), CSource.ANALYTIC_DETERMINISTIC)


def _kernel_integrand(service: ServiceDistribution, lam: float, n: int):
    """uⁿ e^{−λI(u/λ)} (1 − G(u/λ)) in dimensionless time u = λt."""

    def integrand(u: float) -> float:
        if u <= 0.0:
            return float(service.survival(0.0)) if n == 0 else 0.0
        t = u / lam
        log_value = (n * math.log(u) - lam * service.integrated_tail(t)
                     + service.log_survival(t))
        return math.exp(log_value) if log_value > -745.0 else 0.0

    return integrand


def _kernel_tail_class(service: ServiceDistribution, lam: float, n: int):
    bound = service.survival_bound()
    if bound.shape == "exponential":
        return ExponentialTail(rate=bound.rate / lam, power=float(n),
                               coefficient=bound.coefficient)
    # 1 − G(t) ≤ x^θ t^{−θ} and e^{−λI(t)} ≤ e^{−λI(x)} beyond the scale x
    theta = bound.rate
    log_coefficient = math.log(bound.coefficient) + theta * math.log(lam)
    plateau = math.exp(-lam * float(service.integrated_tail(bound.start)))
    return PlateauTimesPowerTail(
        exponent=n - theta,
        coefficient=math.exp(min(log_coefficient, 700.0)),
        start=lam * bound.start,
        plateau=plateau,
    )


def c_derivatives_quadrature(config: QueueConfig, n_max: int,
                             settings: Optional[QuadratureSettings] = None) -> CDerivatives:
    """
    Dₙ by quadrature for any service law; D₀ = 1 − e^{−ρ} exactly.

    Integration runs in u = λt so that the integrals are O(n!) whatever λ
    is; Dₙ = λ^{−n} ∫ uⁿ e^{−λI(u/λ)} (1 − G(u/λ)) du.

    Raises:
        DivergenceError: heavy tail under the ErrorIfDivergent policy
        QuadratureAccuracyError: subdivision budget exhausted
    """
    settings = settings or QuadratureSettings()
    n_max = _require_order(n_max)
    service, lam, rho = config.service, config.lam, config.rho

    if service.degenerate:
        return CDerivatives(lam, rho, (0.0,) * n_max, CSource.QUADRATURE,
                            warnings=("degenerate service law",))

    d = [-math.expm1(-rho)]
    tail_bounds = [0.0]
    warnings = []
    divergent_from = None
    upper = service.support_upper
    points = tuple(lam * p for p in service.breakpoints)

    for n in range(1, n_max):
        integrand = _kernel_integrand(service, lam, n)
        if math.isfinite(upper):
            b = lam * upper
            result = integrate_finite(integrand, 0.0, b, settings,
                                      points=points + geometric_breakpoints(0.0, b))
        else:
            result = integrate_semi_infinite(
                integrand, 0.0, _kernel_tail_class(service, lam, n), settings,
                points=points,
                horizon_cap=settings.horizon_cap * lam,
                order=n + 1,
            )
        if result.divergent and divergent_from is None:
            divergent_from = n
        d.append(result.value * math.exp(-n * math.log(lam)))
        tail_bounds.append(result.truncated_tail_bound)
        warnings.extend(result.warnings)

    return CDerivatives(lam, rho, tuple(d), CSource.QUADRATURE,
                        divergent_from=divergent_from,
                        tail_bounds=tuple(tail_bounds),
                        warnings=tuple(warnings))


# ===================== Recurrence =====================


def moments_recurrence(cderivs: CDerivatives, lam: float, rho: float, n_max: int) -> MomentSet:
    """E[B¹..Bᴺ] from D₀..D_{N−1} in log space."""
    lam = _require_positive("lambda", lam)
    rho = _require_positive("rho", rho)
    n_max = _require_order(n_max)
    if cderivs.n_max < n_max:
        raise ParameterDomainError(
            f"need D_0..D_{n_max - 1}, got {cderivs.n_max} kernel derivatives"
        )
    provenance = (Provenance.RECURRENCE_ANALYTIC_C
                  if cderivs.source is CSource.ANALYTIC_DETERMINISTIC
                  else Provenance.RECURRENCE_QUADRATURE_C)
    warnings = list(cderivs.warnings)

    if all(x <= 0.0 for x in cderivs.d[:n_max]):
        return MomentSet(lam, rho, (-math.inf,) * n_max, provenance,
                         degenerate=True, warnings=tuple(warnings))

    log_d = [math.log(x) if x > 0.0 else -math.inf for x in cderivs.d]

    log_moments = []
    for n in range(1, n_max + 1):
        terms = [math.log(n / lam) + log_d[n - 1]]
        for p in range(1, n):
            terms.append(_log_binom(n, p) + log_moments[n - p - 1] + log_d[p])
        log_moments.append(rho + float(logsumexp(terms)))

    divergent_from = None
    if cderivs.divergent_from is not None and cderivs.divergent_from + 1 <= n_max:
        divergent_from = cderivs.divergent_from + 1
        message = (f"E[B^n] diverges for n >= {divergent_from}; "
                   "reported values are truncation-horizon effective moments")
        warnings.append(message)
        logger.warning(message)

    return MomentSet(lam, rho, tuple(log_moments), provenance,
                     divergent_from=divergent_from, warnings=tuple(warnings))


# ===================== Shape Statistics =====================


def shape_stats(moments: MomentSet, allow_divergent: bool = False) -> ShapeStats:
    """
    (δ₁, δ₂, δ₃) from E[B¹..B⁴] through rₙ = E[Bⁿ]/E[B]ⁿ.

    Args:
        moments: at least four orders
        allow_divergent: accept horizon-effective moments (flags the result)

    Raises:
        DivergenceError: an order ≤ 4 diverges and allow_divergent is False
        DegenerateDistributionError: zero variance
    """
    if moments.n_max < 4:
        raise ParameterDomainError("shape statistics need moments up to order 4")
    if moments.degenerate:
        raise DegenerateDistributionError("busy period is identically zero")
    divergent = moments.divergent_from is not None and moments.divergent_from <= 4
    if divergent and not allow_divergent:
        raise DivergenceError(moments.divergent_from, "shape statistics need E[B^4]")

    log_m = moments.log_moments
    r2, r3, r4 = (math.exp(log_m[k - 1] - k * log_m[0]) for k in (2, 3, 4))
    mu2 = r2 - 1.0
    if mu2 <= 1e-12 * r2:
        raise DegenerateDistributionError(f"variance vanishes within rounding (r2 = {r2!r})")
    mu3 = r3 - 3.0 * r2 + 2.0
    mu4 = r4 - 4.0 * r3 + 6.0 * r2 - 3.0
    return ShapeStats(
        delta1=math.sqrt(mu2),
        delta2=mu3 * mu3 / mu2 ** 3,
        delta3=mu4 / (mu2 * mu2),
        divergent=divergent,
    )


# ===================== Engine Dispatch =====================


def busy_period_moments(config: QueueConfig, n_max: int,
                        settings: Optional[QuadratureSettings] = None) -> MomentSet:
    """
    E[B¹..Bᴺ] by the most exact engine available for the service law:
    closed form (β family), exact kernel derivatives (deterministic) or
    quadrature (everything else).
    """
    service = config.service
    if isinstance(service, BetaFamily):
        if service.beta == 0.0:
            return closed_moments_g1(config.lam, config.rho, n_max)
        return closed_moments_beta(service.lam, service.rho, service.beta, n_max)
    if isinstance(service, Deterministic):
        cderivs = c_derivatives_deterministic(config.lam, service.alpha, n_max)
    else:
        cderivs = c_derivatives_quadrature(config, n_max, settings)
    return moments_recurrence(cderivs, config.lam, config.rho, n_max)
