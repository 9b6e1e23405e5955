import numpy as np
import pytest
from hypothesis import settings

from ddident.harness import make_probe, reference_system

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

T = 10e-6


@pytest.fixture(scope="session")
def ref_system():
    return reference_system()


@pytest.fixture(scope="session")
def ref_probe():
    return make_probe(T=T, p=4, N=30)


def relerr(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
