"""Tests for the quadrature layer and its tail classes."""

import math

import pytest

from busyq.errors import DivergenceError, ParameterDomainError, QuadratureAccuracyError
from busyq.quadrature import (
    ExponentialTail,
    PlateauTimesPowerTail,
    PowerTail,
    QuadratureSettings,
    TailPolicy,
    geometric_breakpoints,
    integrate_finite,
    integrate_semi_infinite,
)


def test_finite_integral():
    result = integrate_finite(math.sin, 0.0, math.pi)
    assert result.value == pytest.approx(2.0, rel=1e-12)
    assert result.truncated_tail_bound == 0.0
    assert not result.divergent


def test_finite_integral_empty_interval():
    assert integrate_finite(lambda t: 1.0, 2.0, 2.0).value == 0.0


def test_finite_integral_rejects_reversed_limits():
    with pytest.raises(ParameterDomainError):
        integrate_finite(lambda t: 1.0, 1.0, 0.0)


def test_finite_integral_with_jump():
    result = integrate_finite(lambda t: 1.0 if t < 0.3 else 0.0, 0.0, 1.0, points=(0.3,))
    assert result.value == pytest.approx(0.3, rel=1e-12)


def test_subdivision_budget_exhausted():
    settings = QuadratureSettings(max_subdivisions=2)
    with pytest.raises(QuadratureAccuracyError) as excinfo:
        integrate_finite(lambda t: math.cos(50.0 * t), 0.0, 10.0, settings)
    assert math.isfinite(excinfo.value.best_estimate)


def test_exponential_tail():
    result = integrate_semi_infinite(lambda t: math.exp(-t), 0.0, ExponentialTail(1.0))
    assert result.value == pytest.approx(1.0, rel=1e-12)
    assert result.truncated_tail_bound < 1e-14
    assert result.warnings == ()


def test_exponential_tail_with_power():
    decay = ExponentialTail(1.0, power=3.0)
    result = integrate_semi_infinite(lambda t: t ** 3 * math.exp(-t), 0.0, decay)
    assert result.value == pytest.approx(6.0, rel=1e-11)


def test_exponential_tail_bound():
    assert ExponentialTail(1.0).bound(0.0) == pytest.approx(1.0)
    assert ExponentialTail(2.0, coefficient=3.0).bound(1.0) == pytest.approx(1.5 * math.exp(-2.0))


def test_convergent_power_tail_hits_horizon_cap():
    result = integrate_semi_infinite(lambda t: t ** -3, 1.0, PowerTail(-3.0))
    assert result.horizon == pytest.approx(1e6)
    assert result.truncated_tail_bound == pytest.approx(0.5e-12)
    assert result.value == pytest.approx(0.5, rel=1e-9)
    assert result.warnings


def test_plateau_scales_the_bound():
    plain = PowerTail(-3.0, coefficient=2.0)
    damped = PlateauTimesPowerTail(-3.0, coefficient=2.0, plateau=1e-3)
    assert damped.bound(10.0) == pytest.approx(1e-3 * plain.bound(10.0))
    assert damped.horizon_for(1e-14) < plain.horizon_for(1e-14)


def test_power_tail_bound_only_holds_past_its_start():
    decay = PlateauTimesPowerTail(-2.0, coefficient=1.0, start=66.0, plateau=1e-24)
    assert decay.horizon_for(1e-14) == 66.0
    assert decay.bound(10.0) == math.inf
    assert decay.bound(66.0) == pytest.approx(1e-24 / 66.0)


def test_semi_infinite_integral_reaches_past_the_tail_start():
    # flat up to 50, then 50² t⁻³; the bound is only valid beyond 50
    decay = PowerTail(-3.0, coefficient=2500.0, start=50.0)
    result = integrate_semi_infinite(
        lambda t: 1.0 if t < 50.0 else 2500.0 / t ** 3, 0.0, decay, points=(50.0,)
    )
    assert result.horizon >= 50.0
    assert result.value == pytest.approx(50.5, rel=1e-8)


def test_divergent_tail_raises_with_order():
    with pytest.raises(DivergenceError) as excinfo:
        integrate_semi_infinite(lambda t: 1.0 / (1.0 + t), 0.0, PowerTail(-1.0), order=3)
    assert excinfo.value.order == 3


def test_divergent_tail_truncates_under_policy():
    settings = QuadratureSettings(
        tail_policy=TailPolicy.TRUNCATE_AND_WARN, truncation_horizon=100.0
    )
    result = integrate_semi_infinite(lambda t: 1.0 / (1.0 + t), 0.0, PowerTail(-1.0), settings)
    assert result.divergent
    assert result.value == pytest.approx(math.log(101.0), rel=1e-10)
    assert any("divergent" in w for w in result.warnings)


def test_explicit_horizon():
    settings = QuadratureSettings(truncation_horizon=10.0)
    result = integrate_semi_infinite(lambda t: math.exp(-t), 0.0, ExponentialTail(1.0), settings)
    assert result.horizon == 10.0
    assert result.value == pytest.approx(-math.expm1(-10.0), rel=1e-12)
    assert result.truncated_tail_bound == pytest.approx(math.exp(-10.0))


def test_geometric_breakpoints():
    assert geometric_breakpoints(0.0, 100.0) == (1.0, 4.0, 16.0, 64.0)
    assert geometric_breakpoints(5.0, 100.0) == (16.0, 64.0)
    assert geometric_breakpoints(0.0, 0.5) == ()


def test_settings_validation():
    with pytest.raises(ValueError):
        QuadratureSettings(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSettings(truncation_horizon=-1.0)
