import pytest

from hybridrelay.models import ChannelParams, SystemConfig
from hybridrelay.settings import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def env(monkeypatch):
    """Set environment variables and drop the cached settings."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(key, str(value))
        get_settings.cache_clear()

    return apply


@pytest.fixture
def baseline_config() -> SystemConfig:
    # all means 1, unit powers and noise, no RSI, R0 = 1: m1 = m3 = 1, m2 = m2p = 3
    return SystemConfig(p_s=1.0, p_r=1.0, sigma2=1.0, k_r=0.0, r0=1.0)


@pytest.fixture
def skewed_config() -> SystemConfig:
    return SystemConfig(
        p_s=20.0,
        p_r=5.0,
        sigma2=1.0,
        k_r=0.3,
        r0=1.5,
        channel=ChannelParams(omega_11=2.0, omega_12=0.5, omega_21=3.0, omega_22=0.8),
    )
