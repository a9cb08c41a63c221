import numpy as np
import pytest

from multipole_response.files import bundled_model_path, load_model


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def vacuum():
    return load_model(bundled_model_path("vacuum"))


@pytest.fixture(scope="session")
def diamagnetic():
    return load_model(bundled_model_path("diamagnetic"))


@pytest.fixture(scope="session")
def paramagnetic():
    return load_model(bundled_model_path("paramagnetic"))


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
