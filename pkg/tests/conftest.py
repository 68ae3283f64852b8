import pytest

from np_spectra import RegularityClass, make_circle, make_ellipse, make_weierstrass_curve

# acceptance lines collected by tests/test_acceptance.py, echoed in the summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def circle():
    return make_circle(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return make_ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def rough_curve():
    return make_weierstrass_curve(RegularityClass(1, 0.5), 6, amplitude=0.2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
