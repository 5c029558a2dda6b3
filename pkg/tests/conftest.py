import numpy as np
import pytest

from aerowind.aero import AeroCoefficients, ThrustModel
from aerowind.config import example_config_path, load_config
from aerowind.dynamics import RigidBodyParams, trim_level_flight


@pytest.fixture(scope="session")
def config():
    return load_config(example_config_path())


@pytest.fixture(scope="session")
def params(config):
    return config.params


@pytest.fixture(scope="session")
def aero():
    return AeroCoefficients()


@pytest.fixture(scope="session")
def trim(params, aero):
    return trim_level_flight(16.8, params, aero)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_params(**kw):
    base = dict(inertia=[1.229, 0.1702, 0.8808], thrust=ThrustModel(30.0))
    base.update(kw)
    return RigidBodyParams(**base)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
