"""
BusyQ - Transforms Module
===========================
Busy-period Laplace-Stieltjes transform and distribution function.

  - lst_busy_period:   B̄(s) = 1 + λ^{−1}(s − 1/K(s)),  K(s) = ∫₀^∞ e^{−st−λI(t)} dt
  - busy_cdf_series:   B(t) = 1 − u(t)/λ with u = Σₙ c^{n*} the renewal density
                       of the kernel c(t) = e^{−λI(t)} λ(1 − G(t)), whose mass
                       is 1 − e^{−ρ}
  - busy_cdf_beta:     closed form for the constant-β service family
  - busy_cdf_heavy_traffic: the exponential law 1 − (1 − e^{−ρ})e^{−λe^{−ρ}t}
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt
from scipy.fft import next_fast_len

from busyq.config import (
    SERIES_DIRECT_MAX_POINTS,
    SERIES_HEAVY_TRAFFIC_MEANS,
    SERIES_MAX_GRID_POINTS,
    SERIES_MAX_TERMS,
    SERIES_POINTS_PER_SCALE,
    SERIES_TAIL_BUDGET,
    SERIES_TILT,
)
from busyq.distributions import BetaFamily, QueueConfig
from busyq.errors import ParameterDomainError
from busyq.quadrature import QuadratureSettings, geometric_breakpoints, integrate_finite

logger = logging.getLogger(__name__)

# e^{−ρ} is treated as underflowed beyond this
RHO_UNDERFLOW = 700.0
# points of the heavy-traffic fallback grid when no step is given
FALLBACK_POINTS = 1001


class GridKind(str, Enum):
    DENSITY = "Density"
    CDF = "CDF"


@dataclass(frozen=True)
class GridFunction:
    """Values on the uniform grid t₀ + j·dt, j = 0..len(values)−1."""

    t0: float
    dt: float
    values: np.ndarray
    kind: GridKind = GridKind.CDF
    method: str = ""
    warnings: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.dt <= 0.0:
            raise ParameterDomainError(f"grid step must be positive, got {self.dt!r}")

    def __len__(self):
        return self.values.size

    @property
    def t_max(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    def at(self, t):
        """Linear interpolation; constant beyond the last grid point."""
        out = np.interp(np.asarray(t, dtype=float), self.times(), self.values)
        return float(out) if out.ndim == 0 else out

    def is_valid(self, slack: float = 1e-9) -> bool:
        if self.kind is GridKind.DENSITY:
            return bool(np.all(self.values >= -1e-12))
        return bool(
            np.all(np.diff(self.values) >= -slack)
            and self.values.min() >= -slack
            and self.values.max() <= 1.0 + slack
        )

    def sup_distance(self, other: Union["GridFunction", Callable], t_max: Optional[float] = None) -> float:
        """max |self − other| over this grid's points (up to t_max)."""
        t = self.times()
        mask = t <= t_max if t_max is not None else np.ones(t.size, dtype=bool)
        if isinstance(other, GridFunction):
            theirs = other.at(t[mask])
        else:
            theirs = np.asarray(other(t[mask]), dtype=float)
        return float(np.max(np.abs(self.values[mask] - theirs)))

    def laplace_stieltjes(self, s: float) -> float:
        """∫ e^{−st} dB(t) of a CDF grid, the mass beyond t_max placed at t_max."""
        if self.kind is not GridKind.CDF:
            raise ParameterDomainError("laplace_stieltjes needs a CDF grid")
        t = self.times()
        mids = 0.5 * (t[:-1] + t[1:])
        jumps = np.diff(self.values)
        return float(
            self.values[0]
            + np.sum(np.exp(-s * mids) * jumps)
            + math.exp(-s * t[-1]) * (1.0 - self.values[-1])
        )

    def to_frame(self, column: str = "B") -> pd.DataFrame:
        return pd.DataFrame({"t": self.times(), column: self.values})


class SeriesSettings(BaseModel):
    """Grid and truncation control for busy_cdf_series."""

    model_config = ConfigDict(frozen=True)

    dt: Optional[PositiveFloat] = Field(
        default=None, description="Grid step; default min(α, 1/λ)/200"
    )
    t_max: Optional[PositiveFloat] = Field(
        default=None, description="Grid extent; default 10·e^ρ/λ"
    )
    n_terms: Union[PositiveInt, Literal["auto"]] = Field(
        default="auto", description="Convolution terms kept, or 'auto'"
    )
    method: Literal["auto", "direct", "spectral"] = Field(
        default="auto", description="Series evaluation strategy"
    )


# ===================== Transform =====================


def _require_s(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s <= 0.0:
        raise ParameterDomainError(f"s must be positive, got {s!r}")
    return s


def lst_busy_period(config: QueueConfig, s: float,
                    settings: Optional[QuadratureSettings] = None) -> float:
    """
    B̄(s) = E[e^{−sB}] for any service law.

    K(s) is integrated up to a horizon T beyond which either the residual
    tail λ·(α − I(T)) or the discount e^{−sT} is below the relative
    tolerance; the remainder is e^{−λI(T)} e^{−sT}/s.
    """
    s = _require_s(s)
    settings = settings or QuadratureSettings()
    service, lam = config.service, config.lam
    if service.degenerate:
        return 1.0

    # K(s) ≥ 1/(s+λ) because I(t) ≤ t
    t_discount = math.log((s + lam) / (s * settings.rel_tol)) / s
    if math.isfinite(service.support_upper):
        horizon = min(service.support_upper, t_discount)
    else:
        horizon = max(service.mean, 1.0 / lam)
        while horizon < t_discount and lam * service.residual_tail(horizon) >= settings.rel_tol:
            horizon *= 2.0
        horizon = min(horizon, t_discount)

    def integrand(t):
        return math.exp(-s * t - lam * service.integrated_tail(t))

    first = min(service.mean, 1.0 / lam, 1.0 / s)
    points = tuple(service.breakpoints) + geometric_breakpoints(0.0, horizon, first=first)
    body = integrate_finite(integrand, 0.0, horizon, settings, points=points)
    remainder = math.exp(-lam * service.integrated_tail(horizon) - s * horizon) / s
    kernel = body.value + remainder
    value = 1.0 + (s - 1.0 / kernel) / lam
    return min(max(value, 0.0), 1.0)


def lst_busy_beta(lam: float, rho: float, beta: float, s: float) -> float:
    """(1 − w) + w·θ/(s + θ) for the constant-β family."""
    s = _require_s(s)
    service = BetaFamily(lam, rho, beta)
    if service.degenerate:
        return 1.0
    w = service.weight
    theta = math.exp(-service.rho) * service.rate
    return (1.0 - w) + w * theta / (s + theta)


# ===================== Closed-Form Distribution Functions =====================


def _check_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise ParameterDomainError("t must be nonnegative")
    return arr


def _float_or_array(values):
    return float(values) if np.ndim(values) == 0 else values


def busy_cdf_beta(lam: float, rho: float, beta: float, t):
    """
    B(t) = 1 − ((λ+β)/λ)(1 − e^{−ρ}) e^{−e^{−ρ}(λ+β)t}.

    Atom 1 − w at the origin; β = −λ gives B ≡ 1.
    """
    t = _check_times(t)
    service = BetaFamily(lam, rho, beta)
    if service.degenerate:
        return _float_or_array(np.ones_like(t))
    log_theta = math.log(service.rate) - service.rho
    return _float_or_array(1.0 - service.weight * np.exp(-np.exp(log_theta) * t))


def busy_cdf_heavy_traffic(lam: float, rho: float, t):
    """1 − (1 − e^{−ρ}) e^{−λe^{−ρ}t}: exponential with mean e^ρ/λ, atom e^{−ρ} at 0."""
    t = _check_times(t)
    if lam <= 0.0 or rho <= 0.0:
        raise ParameterDomainError("lambda and rho must be positive")
    rate = math.exp(math.log(lam) - rho)
    return _float_or_array(1.0 + math.expm1(-rho) * np.exp(-rate * t))


def heavy_traffic_mean(lam: float, rho: float) -> float:
    """e^ρ/λ, mean of the exponential part of the heavy-traffic law."""
    if lam <= 0.0 or rho <= 0.0:
        raise ParameterDomainError("lambda and rho must be positive")
    log_mean = rho - math.log(lam)
    return math.exp(log_mean) if log_mean < 709.78 else math.inf


# ===================== Convolution Series =====================


def resolve_grid(config: QueueConfig, settings: Optional[SeriesSettings] = None,
                 warnings: Optional[list] = None) -> tuple:
    """(dt, number of points) of the series grid, coarsened when too large."""
    settings = settings or SeriesSettings()
    warnings = warnings if warnings is not None else []
    lam, rho = config.lam, config.rho
    dt = settings.dt or min(config.service.mean, 1.0 / lam) / SERIES_POINTS_PER_SCALE
    t_max = settings.t_max or SERIES_HEAVY_TRAFFIC_MEANS * math.exp(min(rho, RHO_UNDERFLOW)) / lam
    points = int(math.ceil(t_max / dt)) + 1
    if points > SERIES_MAX_GRID_POINTS:
        dt = t_max / (SERIES_MAX_GRID_POINTS - 1)
        points = SERIES_MAX_GRID_POINTS
        warnings.append(f"grid coarsened to dt={dt:.4g} to stay within {points} points")
        logger.warning(warnings[-1])
    return dt, points


def _auto_terms(rho: float) -> int:
    """Smallest N with (1 − e^{−ρ})^N e^ρ below the truncation budget."""
    log_d = math.log(-math.expm1(-rho))
    if log_d >= 0.0:
        return SERIES_MAX_TERMS + 1
    return max(1, int(math.ceil((math.log(SERIES_TAIL_BUDGET) - rho) / log_d)))


def _cell_weights(config: QueueConfig, dt: float, points: int) -> np.ndarray:
    """
    Kernel masses per grid point.

    The mass of c on [tᵢ, tᵢ₊₁] is e^{−λI(tᵢ)} − e^{−λI(tᵢ₊₁)} exactly and
    is split evenly between the two end points of its cell. The renewal sum
    at t only sees the kernel on [0, t], so mass beyond the grid is dropped
    rather than folded back in.
    """
    lam = config.lam
    t = dt * np.arange(points + 1)
    lam_i = lam * np.asarray(config.service.integrated_tail(t), dtype=float)
    masses = np.exp(-lam_i[:-1]) * -np.expm1(-np.diff(lam_i))
    weights = 0.5 * masses
    weights[1:] += 0.5 * masses[:-1]
    return weights


def _renewal_direct(weights: np.ndarray, n_terms: int) -> np.ndarray:
    """Σ_{n=1}^{N} w^{n*} with a running convolution power."""
    size = weights.size
    power = weights.copy()
    total = weights.copy()
    for _ in range(n_terms - 1):
        power = np.convolve(power, weights)[:size]
        total += power
    return total


def _renewal_spectral(weights: np.ndarray, n_terms: Optional[int]) -> np.ndarray:
    """
    Σ_{n=1}^{N} w^{n*} (N = None: all terms) through the FFT.

    The weights are tilted by e^{−σj} before transforming, which damps the
    circular wrap-around by e^{−σL}; the result is untilted afterwards.
    """
    size = weights.size
    length = next_fast_len(2 * size, real=True)
    sigma = SERIES_TILT / length
    tilt = np.exp(-sigma * np.arange(size))
    spectrum = np.fft.rfft(weights * tilt, n=length)
    if n_terms is None:
        summed = spectrum / (1.0 - spectrum)
    else:
        summed = spectrum * (1.0 - spectrum ** n_terms) / (1.0 - spectrum)
    return np.fft.irfft(summed, n=length)[:size] / tilt


def busy_cdf_series(config: QueueConfig, settings: Optional[SeriesSettings] = None) -> GridFunction:
    """
    B(t) on a uniform grid from the renewal series of the kernel c.

    With Uⱼ the discrete renewal mass at tⱼ, B(tⱼ) = 1 − Uⱼ/(λ·dt) for
    j ≥ 1 and B(0) = G(0).

    Falls back to the heavy-traffic law (with a warning) when e^{−ρ}
    underflows.
    """
    settings = settings or SeriesSettings()
    lam, rho = config.lam, config.rho
    service = config.service
    warnings = []

    if rho > RHO_UNDERFLOW:
        message = f"e^-rho underflows at rho={rho:g}; using the heavy-traffic law"
        logger.warning(message)
        t_max = settings.t_max or SERIES_HEAVY_TRAFFIC_MEANS * heavy_traffic_mean(lam, RHO_UNDERFLOW)
        dt = settings.dt or t_max / (FALLBACK_POINTS - 1)
        times = dt * np.arange(int(math.ceil(t_max / dt)) + 1)
        log_rate = math.log(lam) - rho
        values = 1.0 - np.exp(-np.exp(log_rate) * times)
        return GridFunction(0.0, dt, values, GridKind.CDF, "heavy-traffic", (message,))

    dt, points = resolve_grid(config, settings, warnings)
    if service.degenerate:
        return GridFunction(0.0, dt, np.ones(points), GridKind.CDF, "degenerate", tuple(warnings))

    auto_terms = _auto_terms(rho)
    n_terms = auto_terms if settings.n_terms == "auto" else settings.n_terms
    method = settings.method
    if method == "auto":
        small = points <= SERIES_DIRECT_MAX_POINTS and n_terms <= SERIES_MAX_TERMS
        method = "direct" if small else "spectral"

    weights = _cell_weights(config, dt, points)
    if method == "direct":
        if n_terms > SERIES_MAX_TERMS:
            warnings.append(
                f"{n_terms} convolution terms requested; direct sum truncated at {SERIES_MAX_TERMS}"
            )
            logger.warning(warnings[-1])
            n_terms = SERIES_MAX_TERMS
        renewal = _renewal_direct(weights, n_terms)
    else:
        explicit = None if settings.n_terms == "auto" else n_terms
        renewal = _renewal_spectral(weights, explicit)

    values = 1.0 - renewal / (lam * dt)
    values[0] = float(service.cdf(0.0))
    values = np.clip(values, 0.0, 1.0)
    logger.info("busy_cdf_series: %d points, dt=%.4g, method=%s", points, dt, method)
    return GridFunction(0.0, dt, values, GridKind.CDF, method, tuple(warnings))


def heavy_traffic_gap(config: QueueConfig, settings: Optional[SeriesSettings] = None,
                      t_max: Optional[float] = None) -> float:
    """sup |B_series(t) − B_heavy-traffic(t)| over the series grid (t ≤ t_max)."""
    series = busy_cdf_series(config, settings)
    return series.sup_distance(
        lambda t: busy_cdf_heavy_traffic(config.lam, config.rho, t), t_max=t_max
    )
