"""Shared pytest fixtures."""

import os
import sys

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from busyq.distributions import BetaFamily, Deterministic, Exponential, QueueConfig
from busyq.quadrature import QuadratureSettings, TailPolicy


@pytest.fixture
def quad_settings():
    return QuadratureSettings()


@pytest.fixture
def truncating_settings():
    return QuadratureSettings(tail_policy=TailPolicy.TRUNCATE_AND_WARN)


@pytest.fixture
def mm_config():
    """M|M|∞ with λ = 1, α = 1."""
    return QueueConfig(1.0, Exponential(1.0))


@pytest.fixture
def md_config():
    """M|D|∞ with λ = 1, α = 1."""
    return QueueConfig(1.0, Deterministic(1.0))


@pytest.fixture
def g1_config():
    """Constant-β family with β = 0, λ = 1, ρ = 1."""
    return QueueConfig(1.0, BetaFamily(1.0, 1.0, 0.0))
