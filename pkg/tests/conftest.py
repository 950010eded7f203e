import math

import pytest

from ssfkit import potentials as P


@pytest.fixture
def well():
    """Depth 4, width 1: one bound state near -0.4071."""
    return P.square_well(4.0, 1.0)


@pytest.fixture
def zero():
    return P.zero()


@pytest.fixture
def expo():
    return P.exponential(-1.0, 1.0)


def potential_family():
    """Ten short-range potentials of varied strength (wells, exponentials, sech^2)."""
    return [
        P.square_well(1.0, 1.0),
        P.square_well(4.0, 1.0),
        P.square_well(30.0, 1.0),
        P.square_well(2.0, 2.5),
        P.exponential(-0.1, 1.0),
        P.exponential(-3.0, 1.0),
        P.exponential(-10.0, 1.0),
        P.sech2(-1.0, 1.0),
        P.sech2(-6.0, 1.0),
        P.combine(P.constant(-5.0, 0.0, 1.0), P.constant(2.0, 1.0, 2.0)),
    ]


SQRT_HALF_PI = math.pi / 2


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=lambda k: (int(str(k).rstrip("b")), str(k))):
        terminalreporter.write_line(mod.RESULTS[key])
