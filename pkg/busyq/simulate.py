"""
BusyQ - Monte Carlo Oracle
============================
Event-driven simulation of the M|G|∞ queue, sampling busy-period lengths.

A busy period starts with an arrival to an empty system. Because every
customer is served at once, the system empties exactly when the latest
scheduled departure passes without a new arrival, so only that running
maximum has to be tracked. Service and inter-arrival variates are drawn in
batches from a numpy Generator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np
from scipy.stats import kstwo

from busyq.config import (
    SIM_BUFFER_SIZE,
    SIM_CDF_POINTS,
    SIM_DEFAULT_SEED,
    SIM_MAX_EVENTS_PER_PERIOD,
)
from busyq.distributions import QueueConfig
from busyq.errors import ParameterDomainError
from busyq.moments import MomentSet, Provenance, ShapeStats, shape_stats
from busyq.transforms import GridFunction, GridKind

logger = logging.getLogger(__name__)

# power sums up to B⁸ give standard errors for the first four moments
POWER_SUM_ORDERS = 8
REPORTED_ORDERS = 4
# arrivals expected over the whole run beyond which a warning is logged
EXPENSIVE_RUN_EVENTS = 1e8


@dataclass(frozen=True)
class SimulationPlan:
    config: QueueConfig
    n_busy_periods: int
    seed: int = SIM_DEFAULT_SEED
    max_events_per_period: int = SIM_MAX_EVENTS_PER_PERIOD
    replications: int = 1
    cdf_dt: Optional[float] = None

    def __post_init__(self):
        if int(self.n_busy_periods) != self.n_busy_periods or self.n_busy_periods < 1:
            raise ParameterDomainError(f"n_busy_periods must be >= 1, got {self.n_busy_periods!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.max_events_per_period < 1:
            raise ParameterDomainError("max_events_per_period must be >= 1")
        if not 1 <= self.replications <= self.n_busy_periods:
            raise ParameterDomainError(
                f"replications must lie in 1..{self.n_busy_periods}, got {self.replications!r}"
            )
        if self.cdf_dt is not None and self.cdf_dt <= 0.0:
            raise ParameterDomainError("cdf_dt must be positive")

    def periods_per_replication(self) -> list:
        base, extra = divmod(int(self.n_busy_periods), self.replications)
        return [base + (1 if k < extra else 0) for k in range(self.replications)]


@dataclass(frozen=True)
class _PowerSums:
    """Σ Bᵏ for k = 0..8 plus the truncated-period count; merges by addition."""

    sums: np.ndarray
    truncated: int = 0

    @classmethod
    def of(cls, lengths: np.ndarray, truncated: int) -> "_PowerSums":
        orders = np.arange(POWER_SUM_ORDERS + 1)
        sums = np.array([np.sum(lengths ** k) for k in orders], dtype=float)
        return cls(sums, truncated)

    def __add__(self, other: "_PowerSums") -> "_PowerSums":
        return _PowerSums(self.sums + other.sums, self.truncated + other.truncated)


@dataclass(frozen=True)
class SimulationReport:
    config: QueueConfig
    count: int
    moments: tuple
    standard_errors: tuple
    empirical_cdf: GridFunction
    truncated_periods: int
    samples: np.ndarray = field(repr=False)
    warnings: tuple = ()

    @property
    def mean(self) -> float:
        return self.moments[0]

    def mean_interval(self, z: float = 1.96) -> tuple:
        se = self.standard_errors[0]
        if se is None:
            return (-math.inf, math.inf)
        return (self.mean - z * se, self.mean + z * se)

    def moment_set(self) -> MomentSet:
        tail_index = self.config.service.tail_index
        divergent_from = None
        if math.isfinite(tail_index):
            divergent_from = max(1, math.ceil(tail_index))
            if divergent_from > REPORTED_ORDERS:
                divergent_from = None
        with np.errstate(divide="ignore"):
            logs = tuple(float(np.log(m)) for m in self.moments)
        return MomentSet(
            self.config.lam, self.config.rho, logs, Provenance.MONTE_CARLO,
            divergent_from=divergent_from, warnings=self.warnings,
        )

    def shape_stats(self) -> ShapeStats:
        """Sample (δ₁, δ₂, δ₃); flagged divergent when an order ≤ 4 is infinite."""
        return shape_stats(self.moment_set(), allow_divergent=True)

    def ks_distance(self, cdf: Callable) -> float:
        """
        Kolmogorov-Smirnov distance to an analytic CDF that may carry an
        atom at the origin (F(0−) = 0) and is continuous elsewhere.
        """
        x = self.samples
        n = x.size
        f = np.asarray(cdf(x), dtype=float)
        f_left = np.where(x > 0.0, f, 0.0)
        i = np.arange(1, n + 1)
        d_plus = np.max(i / n - f)
        d_minus = np.max(f_left - (i - 1) / n)
        return float(max(d_plus, d_minus))

    def ks_critical_value(self, level: float = 0.01) -> float:
        return float(kstwo.ppf(1.0 - level, self.samples.size))

    def summary_records(self) -> list:
        records = []
        for k, (m, se) in enumerate(zip(self.moments, self.standard_errors), start=1):
            records.append({"n": k, "moment": m, "standard_error": se})
        return records


# ===================== Sampling =====================


def _variates(draw: Callable[[int], np.ndarray]) -> Iterator[float]:
    while True:
        for x in draw(SIM_BUFFER_SIZE).tolist():
            yield x


def _simulate_replication(config: QueueConfig, n_periods: int, seed_seq: np.random.SeedSequence,
                          max_events: int) -> tuple:
    rng = np.random.default_rng(seed_seq)
    lam, service = config.lam, config.service
    arrivals = _variates(lambda size: rng.exponential(1.0 / lam, size))
    services = _variates(lambda size: service.sample(rng, size))

    lengths = []
    truncated = 0
    for _ in range(n_periods):
        # arrival to an empty system at time 0
        latest = next(services)
        t = 0.0
        events = 1
        while True:
            t += next(arrivals)
            if t >= latest:
                lengths.append(latest)
                break
            departure = t + next(services)
            if departure > latest:
                latest = departure
            events += 1
            if events >= max_events:
                truncated += 1
                break
    return np.asarray(lengths, dtype=float), truncated


def _empirical_cdf(samples: np.ndarray, dt: Optional[float]) -> GridFunction:
    top = float(samples[-1]) if samples.size else 0.0
    if dt is None:
        dt = top / (SIM_CDF_POINTS - 1) if top > 0.0 else 1.0
    points = int(math.ceil(top / dt)) + 1 if top > 0.0 else SIM_CDF_POINTS
    times = dt * np.arange(points)
    values = np.searchsorted(samples, times, side="right") / max(samples.size, 1)
    return GridFunction(0.0, dt, values, GridKind.CDF, "empirical")


def sample_busy_periods(plan: SimulationPlan) -> SimulationReport:
    """
    Simulate `plan.n_busy_periods` busy periods.

    Periods that reach the event cap are counted in `truncated_periods` and
    left out of every estimate. Replications use child seeds spawned from
    the plan seed, so a plan always reproduces the same report.
    """
    config = plan.config
    warnings = []
    expected_events = plan.n_busy_periods * math.exp(min(config.rho, 700.0))
    if expected_events > EXPENSIVE_RUN_EVENTS:
        logger.warning("simulating ~%.3g arrivals at rho=%g; expect a long run",
                       expected_events, config.rho)

    children = np.random.SeedSequence(int(plan.seed)).spawn(plan.replications)
    totals = None
    chunks = []
    for child, n_periods in zip(children, plan.periods_per_replication()):
        lengths, truncated = _simulate_replication(
            config, n_periods, child, plan.max_events_per_period
        )
        sums = _PowerSums.of(lengths, truncated)
        totals = sums if totals is None else totals + sums
        chunks.append(lengths)

    samples = np.sort(np.concatenate(chunks))
    samples.setflags(write=False)
    n = int(totals.sums[0])
    if totals.truncated:
        warnings.append(f"{totals.truncated} busy periods hit the event cap and were excluded")
        logger.warning(warnings[-1])
    if n == 0:
        raise ParameterDomainError("every simulated busy period hit the event cap")

    tail_index = config.service.tail_index
    moments = []
    errors = []
    for k in range(1, REPORTED_ORDERS + 1):
        m = totals.sums[k] / n
        moments.append(float(m))
        if k >= tail_index:
            errors.append(None)
            warnings.append(f"E[B^{k}] is infinite for tail index {tail_index:g}; "
                            "the sample moment has no standard error")
            logger.warning(warnings[-1])
            continue
        if 2 * k >= tail_index:
            warnings.append(f"standard error of E[B^{k}] is unreliable (E[B^{2 * k}] is infinite)")
            logger.warning(warnings[-1])
        if n < 2:
            errors.append(None)
            continue
        variance = max((totals.sums[2 * k] - n * m * m) / (n - 1), 0.0)
        errors.append(math.sqrt(variance / n))

    return SimulationReport(
        config=config,
        count=n,
        moments=tuple(moments),
        standard_errors=tuple(errors),
        empirical_cdf=_empirical_cdf(samples, plan.cdf_dt),
        truncated_periods=totals.truncated,
        samples=samples,
        warnings=tuple(warnings),
    )
