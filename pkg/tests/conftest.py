"""Shared configuration factories for the test suite."""

import numpy as np
import pytest

from eccsim import SystemConfig


def make_config(**overrides) -> SystemConfig:
    """Two-provider baseline: small cloud, cheap access, matched demand."""
    kwargs = dict(
        n_ecps=2,
        n_users=100,
        ecp_power=[2.0, 1.0],
        ecp_access_price=[0.3, 0.2],
        cloud_power=2.0,
        cloud_access_price=0.2,
        learning_rate=1.0,
        mapping_factor=1.0,
        discount_rate=0.1,
        ecp_weights=(1.0, 1.0, 1.0),
        ccp_weights=(1.0, 1.0, 1.0),
        nominal_rate=0.05,
        horizon=50.0,
    )
    kwargs.update(overrides)
    return SystemConfig(**kwargs)


def make_big_cloud_config(**overrides) -> SystemConfig:
    """Two-provider variant with a large, expensive cloud."""
    kwargs = dict(cloud_power=5.0, cloud_access_price=0.5, nominal_rate=0.08)
    kwargs.update(overrides)
    return make_config(**kwargs)


@pytest.fixture
def cfg():
    return make_config()


@pytest.fixture
def cfg_big_cloud():
    return make_big_cloud_config()


@pytest.fixture
def x0():
    return np.array([0.3, 0.3, 0.4])
