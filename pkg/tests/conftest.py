import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "core"))

from libs import families  # noqa: E402
from libs.distributions import make_distribution  # noqa: E402


@pytest.fixture
def configs_dir():
    return os.path.join(ROOT, "configs")


@pytest.fixture
def symmetric():
    return families.symmetric_background()


@pytest.fixture
def theta_law():
    """delta = 2"""
    return families.theta_law(0.75, master_seed=11)


@pytest.fixture
def marching_law():
    """One point-mass cookie at +1 per site: X_n = n"""
    return families.point_mass_law(1, M=1, master_seed=11)


@pytest.fixture
def plain_law():
    """No excitement at all: simple symmetric random walk"""
    return families.no_cookie_law(master_seed=11)


@pytest.fixture
def lopsided():
    return make_distribution([(-1, 0.25), (3, 0.75)])
