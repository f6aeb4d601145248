import math

import numpy as np
import pytest
from hypothesis import settings

from aerosym.aero import AeroModel, SymmetricSin2
from aerosym.control import ControllerGains
from aerosym.dynamics import VehicleParams

# first calls load compiled kernels, so per-example deadlines would be flaky
settings.register_profile("aerosym", deadline=None)
settings.load_profile("aerosym")

G = 9.81
ELLIPTIC = (0.43, 0.462)
MISSILE = (0.1, 11.55)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def elliptic():
    return AeroModel(0.05, SymmetricSin2(*ELLIPTIC))


@pytest.fixture
def drone(elliptic):
    return VehicleParams(m=0.8, g=G, aero=elliptic)


@pytest.fixture
def gains():
    m = 0.8
    return ControllerGains(k1=1 / G, k2=0.5 / (m * G * G), k3=4.0)


def rot_x(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
