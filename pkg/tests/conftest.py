import pytest
from hypothesis import HealthCheck, settings

from burstmap.model import standard_params

settings.register_profile("burstmap", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("burstmap")


@pytest.fixture(scope="session")
def std():
    """Quartic a=0.2, b=0.7, I=2, d=1, eps=0.4, v_reset=1.3."""
    return standard_params(1.3, 0.4)
