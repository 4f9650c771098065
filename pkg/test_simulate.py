"""Tests for the Monte Carlo oracle."""

import math

import numpy as np
import pytest

from busyq.distributions import (
    BetaFamily,
    Deterministic,
    Exponential,
    QueueConfig,
    pareto_fixed_scale_for_mean,
    pareto_fixed_shape_for_mean,
    power_for_mean,
)
from busyq.errors import ParameterDomainError
from busyq.moments import mean_busy_period
from busyq.simulate import SimulationPlan, sample_busy_periods
from busyq.transforms import busy_cdf_beta


def test_mm_mean_within_standard_errors(mm_config):
    report = sample_busy_periods(SimulationPlan(mm_config, 100_000, seed=1))
    assert report.count == 100_000
    assert report.truncated_periods == 0
    se = report.standard_errors[0]
    assert abs(report.mean - (math.e - 1.0)) <= 4.0 * se
    low, high = report.mean_interval(z=4.0)
    assert low <= math.e - 1.0 <= high


def test_light_traffic_deterministic():
    config = QueueConfig(0.01, Deterministic(1.0))
    report = sample_busy_periods(SimulationPlan(config, 100_000, seed=2))
    analytic = mean_busy_period(0.01, 0.01)
    assert abs(report.mean - analytic) <= 4.0 * report.standard_errors[0]
    assert report.mean == pytest.approx(1.0, rel=0.01)
    assert report.samples.min() == pytest.approx(1.0)


@pytest.mark.parametrize("service", [
    Deterministic(0.5),
    Exponential(0.5),
    power_for_mean(0.5),
    pareto_fixed_shape_for_mean(0.5),
    pareto_fixed_scale_for_mean(0.5),
    BetaFamily(1.0, 0.5, 0.0),
], ids=lambda s: s.label)
def test_catalog_means(service):
    config = QueueConfig(1.0, service)
    report = sample_busy_periods(SimulationPlan(config, 20_000, seed=3))
    assert abs(report.mean - mean_busy_period(1.0, config.rho)) <= 4.0 * report.standard_errors[0]


def test_beta_family_ks_against_closed_form(g1_config):
    report = sample_busy_periods(SimulationPlan(g1_config, 100_000, seed=4))
    distance = report.ks_distance(lambda t: busy_cdf_beta(1.0, 1.0, 0.0, t))
    assert distance < report.ks_critical_value(0.01)
    # atom at the origin
    assert np.mean(report.samples == 0.0) == pytest.approx(math.exp(-1.0), abs=0.01)


def test_seed_reproducibility(mm_config):
    first = sample_busy_periods(SimulationPlan(mm_config, 2_000, seed=99))
    second = sample_busy_periods(SimulationPlan(mm_config, 2_000, seed=99))
    other = sample_busy_periods(SimulationPlan(mm_config, 2_000, seed=100))
    assert np.array_equal(first.samples, second.samples)
    assert first.moments == second.moments
    assert not np.array_equal(first.samples, other.samples)


def test_replications_split_the_periods(mm_config):
    plan = SimulationPlan(mm_config, 1_003, seed=5, replications=4)
    assert plan.periods_per_replication() == [251, 251, 251, 250]
    report = sample_busy_periods(plan)
    assert report.count == 1_003


def test_heavy_tail_standard_errors():
    config = QueueConfig(1.0, pareto_fixed_shape_for_mean(1.0))
    report = sample_busy_periods(SimulationPlan(config, 5_000, seed=6))
    assert report.standard_errors[0] is not None
    assert report.standard_errors[2] is None
    assert report.standard_errors[3] is None
    assert any("infinite" in w for w in report.warnings)
    assert report.moment_set().divergent_from == 3
    assert report.shape_stats().divergent


def test_event_cap_truncates_periods():
    config = QueueConfig(1.0, Exponential(5.0))
    report = sample_busy_periods(SimulationPlan(config, 1_000, seed=7, max_events_per_period=2))
    assert report.truncated_periods > 0
    assert report.count + report.truncated_periods == 1_000
    assert report.warnings


def test_empirical_cdf(mm_config):
    report = sample_busy_periods(SimulationPlan(mm_config, 5_000, seed=8))
    grid = report.empirical_cdf
    assert grid.is_valid()
    assert grid.values[-1] == 1.0
    assert grid.values[0] == 0.0


def test_summary_records(mm_config):
    report = sample_busy_periods(SimulationPlan(mm_config, 1_000, seed=9))
    records = report.summary_records()
    assert [r["n"] for r in records] == [1, 2, 3, 4]
    assert records[0]["moment"] == report.mean


@pytest.mark.parametrize("kwargs", [
    {"n_busy_periods": 0},
    {"n_busy_periods": 10, "seed": -1},
    {"n_busy_periods": 10, "replications": 11},
    {"n_busy_periods": 10, "max_events_per_period": 0},
    {"n_busy_periods": 10, "cdf_dt": 0.0},
])
def test_plan_validation(mm_config, kwargs):
    with pytest.raises(ParameterDomainError):
        SimulationPlan(mm_config, **kwargs)
