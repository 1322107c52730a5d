import math

import pytest

from raidnc.model import NetworkState, SideInfo

LN2 = math.log(2.0)


def fixture_state(transmission_index: int = 4) -> NetworkState:
    """Three users, three messages: Has = {2,3}, {1}, {3}; N = 1 bit."""
    state = NetworkState(SideInfo.from_has(3, [{2, 3}, {1}, {3}]), 1.0)
    state.transmission_index = transmission_index
    return state


FIXTURE_CAPS = [4.0, 2.0, 2.0]


@pytest.fixture
def worked():
    return fixture_state(), list(FIXTURE_CAPS)
