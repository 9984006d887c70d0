import numpy as np
import pytest

from noma_ee.qos import min_power, qos_profile
from noma_ee.system_model import SystemParams, dbm_to_watts, generate_channel

ACCEPTANCE_LINES = []


def random_instance(rng, k=None, rate_high=3.0, feasible=True, circuit_w=None):
    """Random (channel, params, qos) with -70 dBm noise and path-loss exponent 3.

    With ``feasible=True`` the budget is redrawn above ``P_Min`` when needed.
    """
    k = int(rng.integers(1, 7)) if k is None else k
    channel = generate_channel(rng.uniform(20.0, 150.0, k), 3.0, rng)
    qos = qos_profile(rng.uniform(0.0, rate_high, k))
    if circuit_w is None:
        circuit_w = dbm_to_watts(rng.uniform(10.0, 40.0))
    params = SystemParams(dbm_to_watts(rng.uniform(0.0, 50.0)), 1e-10, circuit_w)
    if feasible:
        p_min = min_power(channel, params, qos).total_w
        if p_min > params.total_power_w:
            params = params.with_total_power(p_min * 10.0 ** rng.uniform(0.0, 3.0))
    return channel, params, qos


@pytest.fixture
def rng():
    return np.random.default_rng(20160604)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
