from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lab", max_examples=25, deadline=None)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def hopf_b():
    from pullback_lab.bundle import hopf
    return hopf()


@pytest.fixture(scope="session")
def s2():
    from pullback_lab.geometry import sphere
    return sphere()


def close(a, b, tol):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) <= tol


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
