import zlib

import numpy as np
import pytest

from lapstab.filtrations import DIAMOND_WEIGHTS, diamond_digraph, digraph_filtration

_CRITERIA: dict = {}


@pytest.fixture(scope="session")
def diamond():
    """Diamond filtration without the edgeless base level: grid 1, 2, 3, 4."""
    return digraph_filtration(diamond_digraph(), DIAMOND_WEIGHTS, 3, base_level=False)


@pytest.fixture(scope="session")
def diamond_base():
    return digraph_filtration(diamond_digraph(), DIAMOND_WEIGHTS, 3)


@pytest.fixture
def rng(request):
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        for key, value in report.user_properties:
            if key == "criterion":
                crit = value
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _CRITERIA.get(crit, "PASS")
        _CRITERIA[crit] = "PASS" if (report.outcome == "passed" and prev == "PASS") else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA, key=lambda c: int(c.split(".")[0])):
        terminalreporter.write_line(f"{_CRITERIA[crit]} criterion {crit}")
