import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_channel(rng: np.random.Generator, n_in: int, n_out: int):
    from hdrelay.infotheory import DmcChannel

    w = rng.dirichlet(np.full(n_out, 0.7), size=n_in)
    return DmcChannel(w)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
