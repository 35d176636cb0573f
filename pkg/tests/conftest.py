import numpy as np
import pytest

from dualorlicz.density import PowerLawDensity
from dualorlicz.measures import DiscreteMeasure

SQRT2 = np.sqrt(2.0)


@pytest.fixture
def power2():
    return PowerLawDensity(2, q=-1.0)


@pytest.fixture
def power3():
    return PowerLawDensity(3, q=-1.0)


@pytest.fixture
def square_measure():
    return DiscreteMeasure([[1, 0], [0, 1], [-1, 0], [0, -1]], [SQRT2] * 4)


def random_measure(rng, m, dim=2):
    """Log-uniform weights on jittered directions; retried until not concentrated."""
    from dualorlicz.solver import check_not_concentrated

    while True:
        if dim == 2:
            theta = np.sort(rng.uniform(0, 2 * np.pi, m))
            dirs = np.c_[np.cos(theta), np.sin(theta)]
        else:
            dirs = rng.standard_normal((m, dim))
        mu = DiscreteMeasure(dirs, np.exp(rng.uniform(-1, 1, m)))
        if check_not_concentrated(mu)[0]:
            return mu


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
