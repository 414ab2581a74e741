import pytest

from pointscatter.observables import gauss_rank1
from pointscatter.rules import make_rules
from pointscatter.states import gauss_poly1d, shell3d

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def rules1():
    return make_rules(1)


@pytest.fixture(scope="session")
def rules3():
    return make_rules(3)


@pytest.fixture(scope="session")
def state1():
    return gauss_poly1d()


@pytest.fixture(scope="session")
def state3():
    return shell3d()


@pytest.fixture(scope="session")
def obs1():
    return gauss_rank1()


@pytest.fixture
def acceptance_line():
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
