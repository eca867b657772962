import numpy as np
import pytest

from cadro.facility import FacilityModel, generate_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_instance():
    return generate_instance(7, 10, 2)


@pytest.fixture(scope="session")
def city_instance():
    return generate_instance(7, 50, 3)


@pytest.fixture(scope="session")
def small_model(small_instance):
    return FacilityModel(small_instance)


@pytest.fixture(scope="session")
def city_model(city_instance):
    return FacilityModel(city_instance)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(LINES):
            terminalreporter.write_line(LINES[key])
