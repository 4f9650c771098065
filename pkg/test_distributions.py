"""Tests for the service-time families, QueueConfig and the spec parser."""

import math

import numpy as np
import pandas as pd
import pytest

from busyq.data_loader import load_tabulated_distribution, parse_dist_spec
from busyq.distributions import (
    BetaFamily,
    Deterministic,
    Exponential,
    ParetoFixedScale,
    ParetoFixedShape,
    Power,
    QueueConfig,
    UserTabulated,
    beta_upper_bound,
    cdf,
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
from busyq.quadrature import integrate_finite

CATALOG = [
    Deterministic(0.7),
    Exponential(1.3),
    Power(4.0),
    ParetoFixedShape(2.0 / 3.0),
    ParetoFixedScale(2.5),
    BetaFamily(1.0, 1.0, 0.0),
    BetaFamily(2.0, 3.0, 0.05),
    UserTabulated((0.0, 0.5, 2.0), (0.2, 0.6, 1.0)),
]


# ===================== Families =====================


def test_deterministic_basics():
    dist = Deterministic(1.0)
    assert dist.cdf(0.5) == 0.0
    assert dist.cdf(1.0) == 1.0
    assert dist.integrated_tail(2.0) == 1.0
    assert dist.support_upper == 1.0


@pytest.mark.parametrize("factory, args, kind, mean", [
    (make_deterministic, (2.0,), Deterministic, 2.0),
    (make_exponential, (1.5,), Exponential, 1.5),
    (make_power, (4.0,), Power, 0.8),
    (make_pareto_fixed_shape, (2.0,), ParetoFixedShape, 3.0),
    (make_pareto_fixed_scale, (2.5,), ParetoFixedScale, 2.0 / 3.0),
    (make_beta_family, (1.0, 1.0, 0.0), BetaFamily, 1.0),
])
def test_factories(factory, args, kind, mean):
    dist = factory(*args)
    assert isinstance(dist, kind)
    assert dist.mean == pytest.approx(mean, rel=1e-12)


def test_exponential_integrated_tail():
    dist = Exponential(2.0)
    assert dist.cdf(1.0) == pytest.approx(1.0 - math.exp(-0.5), rel=1e-14)
    assert dist.integrated_tail(3.0) == pytest.approx(2.0 * (1.0 - math.exp(-1.5)), rel=1e-14)
    assert dist.residual_tail(3.0) == pytest.approx(2.0 * math.exp(-1.5), rel=1e-14)


def test_power_law():
    dist = power_for_mean(0.8)
    assert dist.c == pytest.approx(4.0)
    assert dist.mean == pytest.approx(0.8)
    assert dist.cdf(0.5) == pytest.approx(0.0625)
    assert dist.integrated_tail(1.0) == pytest.approx(dist.mean, rel=1e-14)
    assert dist.integrated_tail(5.0) == pytest.approx(dist.mean, rel=1e-14)


def test_power_for_mean_needs_mean_below_one():
    with pytest.raises(ParameterDomainError):
        power_for_mean(1.0)


def test_pareto_fixed_shape():
    dist = pareto_fixed_shape_for_mean(1.0)
    assert dist.k == pytest.approx(2.0 / 3.0)
    assert dist.mean == pytest.approx(1.0)
    assert dist.survival(dist.k / 2) == 1.0
    assert dist.survival(2 * dist.k) == pytest.approx(0.125)
    assert dist.tail_index == 3.0


def test_pareto_fixed_scale():
    dist = pareto_fixed_scale_for_mean(1.0)
    assert dist.theta == pytest.approx(1.0 / 0.6)
    assert dist.mean == pytest.approx(1.0)
    with pytest.raises(ParameterDomainError):
        ParetoFixedScale(1.0)
    with pytest.raises(ParameterDomainError):
        pareto_fixed_scale_for_mean(0.4)


def test_beta_family_atom_and_mean():
    dist = BetaFamily(1.0, 1.0, 0.0)
    assert dist.atom_at_zero == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert dist.cdf(0.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert dist.mean == 1.0
    assert dist.integrated_tail(200.0) == pytest.approx(1.0, rel=1e-12)


def test_beta_family_upper_end_has_no_atom():
    upper = beta_upper_bound(1.0, 1.0)
    dist = BetaFamily(1.0, 1.0, upper)
    assert dist.atom_at_zero == pytest.approx(0.0, abs=1e-12)


def test_beta_family_degenerate_end():
    dist = BetaFamily(1.0, 1.0, -1.0)
    assert dist.degenerate
    assert dist.cdf(0.5) == 1.0
    assert dist.integrated_tail(3.0) == 0.0


@pytest.mark.parametrize("beta", [-1.5, 1.0])
def test_beta_outside_band_rejected(beta):
    with pytest.raises(ParameterDomainError):
        BetaFamily(1.0, 1.0, beta)


@pytest.mark.parametrize("dist", CATALOG, ids=lambda d: d.label)
@pytest.mark.parametrize("t", [0.3, 1.1, 4.0])
def test_integrated_tail_matches_quadrature(dist, t):
    numeric = integrate_finite(lambda v: float(dist.survival(v)), 0.0, t,
                               points=dist.breakpoints).value
    assert dist.integrated_tail(t) == pytest.approx(numeric, rel=1e-8)


@pytest.mark.parametrize("dist", CATALOG, ids=lambda d: d.label)
def test_integrated_tail_tends_to_mean(dist):
    far = 1e9 if math.isfinite(dist.tail_index) else 500.0
    assert dist.integrated_tail(far) == pytest.approx(dist.mean, rel=1e-6)
    assert dist.integrated_tail(0.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("dist", CATALOG, ids=lambda d: d.label)
def test_sample_mean(dist):
    rng = np.random.default_rng(11)
    x = dist.sample(rng, 200_000)
    assert np.all(x >= 0.0)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - dist.mean) <= 5.0 * se + 1e-12


def test_cdf_rejects_negative_time():
    with pytest.raises(ParameterDomainError):
        cdf(Exponential(1.0), -1.0)


# ===================== Tabulated laws =====================


def test_tabulated_uniform():
    dist = make_user_tabulated([0.0, 1.0], [0.0, 1.0])
    assert dist.mean == pytest.approx(0.5)
    assert dist.cdf(0.25) == pytest.approx(0.25)
    assert dist.support_upper == 1.0


def test_tabulated_with_atom():
    dist = make_user_tabulated([0.0, 1.0], [0.5, 1.0])
    assert dist.atom_at_zero == pytest.approx(0.5)
    assert dist.mean == pytest.approx(0.25)


@pytest.mark.parametrize("times, values", [
    ([0.5, 1.0], [0.0, 1.0]),
    ([0.0, 1.0, 1.0], [0.0, 0.5, 1.0]),
    ([0.0, 1.0, 2.0], [0.0, 0.6, 0.4]),
    ([0.0, 1.0], [0.0, 0.9]),
])
def test_tabulated_validation(times, values):
    with pytest.raises(ParameterDomainError):
        make_user_tabulated(times, values)


# ===================== QueueConfig =====================


def test_queue_config_rho():
    assert QueueConfig(2.0, Deterministic(1.5)).rho == pytest.approx(3.0)
    assert QueueConfig.from_rho(Exponential(4.0), 2.0).lam == pytest.approx(0.5)


def test_queue_config_rejects_mismatched_beta_lambda():
    with pytest.raises(ParameterDomainError):
        QueueConfig(2.0, BetaFamily(1.0, 1.0, 0.0))


@pytest.mark.parametrize("lam", [0.0, -1.0, math.inf, math.nan])
def test_queue_config_rejects_bad_lambda(lam):
    with pytest.raises(ParameterDomainError):
        QueueConfig(lam, Exponential(1.0))


# ===================== Spec parsing =====================


@pytest.mark.parametrize("text, expected", [
    ("det:alpha=1", Deterministic(1.0)),
    ("exp:a=2.5", Exponential(2.5)),
    ("pow:c=4", Power(4.0)),
    ("pareto3:k=2", ParetoFixedShape(2.0)),
    ("paretok:theta=3", ParetoFixedScale(3.0)),
    ("beta:lambda=1,rho=1,beta=0", BetaFamily(1.0, 1.0, 0.0)),
    ("BETA: lam=2, rho=0.5, beta=0", BetaFamily(2.0, 0.5, 0.0)),
])
def test_parse_dist_spec(text, expected):
    assert parse_dist_spec(text) == expected


def test_parse_mean_parameterizations():
    assert parse_dist_spec("pow:alpha=0.8").c == pytest.approx(4.0)
    assert parse_dist_spec("pareto3:alpha=1").mean == pytest.approx(1.0)
    assert parse_dist_spec("paretok:alpha=1").mean == pytest.approx(1.0)


@pytest.mark.parametrize("text, field", [
    ("foo:x=1", "kind"),
    ("exp", "kind"),
    ("exp:alpha=-1", "alpha"),
    ("exp:alpha=abc", "alpha"),
    ("exp:beta=1", "alpha"),
    ("beta:lambda=1,rho=1", "beta"),
    ("beta:lambda=1,rho=1,beta=5", "beta"),
])
def test_parse_errors_name_the_field(text, field):
    with pytest.raises(DistSpecError) as excinfo:
        parse_dist_spec(text)
    assert excinfo.value.field == field


def test_load_tabulated_csv(tmp_path):
    path = tmp_path / "service.csv"
    pd.DataFrame({"t": [0.0, 1.0, 3.0], "G": [0.0, 0.5, 1.0]}).to_csv(path, index=False)
    dist = parse_dist_spec(f"table:path={path}")
    assert isinstance(dist, UserTabulated)
    assert dist.mean == pytest.approx(0.75 * 1.0 + 0.25 * 2.0)


def test_load_tabulated_csv_missing_column(tmp_path):
    path = tmp_path / "service.csv"
    pd.DataFrame({"t": [0.0, 1.0], "F": [0.0, 1.0]}).to_csv(path, index=False)
    with pytest.raises(DistSpecError) as excinfo:
        load_tabulated_distribution(str(path))
    assert excinfo.value.field == "G"


def test_load_tabulated_csv_missing_file(tmp_path):
    with pytest.raises(DistSpecError) as excinfo:
        load_tabulated_distribution(str(tmp_path / "nope.csv"))
    assert excinfo.value.field == "path"
