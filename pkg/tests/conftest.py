import pytest

from riscalc.channel import GlobalConfig, RisLinkConfig
from riscalc.snr_stats import Scenario


@pytest.fixture
def config():
    return GlobalConfig()


@pytest.fixture
def rayleigh5():
    return RisLinkConfig(n_elements=5)


@pytest.fixture
def iid3(config):
    """K=3 identical RISs, N=5, m=1, Omega=1, d=(5,5) m."""
    return Scenario(config, [RisLinkConfig(5)] * 3)


@pytest.fixture
def line_links():
    return (
        RisLinkConfig(1, d1_m=1, d2_m=9),
        RisLinkConfig(1, d1_m=5, d2_m=5),
        RisLinkConfig(1, d1_m=9, d2_m=1),
    )


def db(x):
    return 10.0 ** (x / 10.0)
