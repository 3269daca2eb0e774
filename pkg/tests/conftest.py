import math
import re

import numpy as np
import pytest

from leakage_lab import make_joint

EX1_CHANNEL = [[0, 0, 0.5, 0.5],
               [0, 0, 0.5, 0.5],
               [0, 0.2, 0.4, 0.4],
               [0.2, 0, 0.4, 0.4]]
# the h map 1,3 -> 1 and 2,4 -> 2
EX1_H = [[1, 0], [0, 1], [1, 0], [0, 1]]

LOG4 = math.log(4)
LOG10_9 = math.log(10 / 9)


@pytest.fixture
def ex1():
    return make_joint([0.25] * 4, EX1_CHANNEL)


@pytest.fixture
def appc():
    """The 2x3 mechanism used for the event-leakage examples."""
    return make_joint([0.5, 0.5], [[0.9, 0, 0.1], [0, 0.9, 0.1]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- one summary line per acceptance criterion --------------------------------

_criteria: dict[int, list[bool]] = {}
_titles: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_collection_modifyitems(items):
    for item in items:
        m = re.search(r"test_ac(\d+)", item.name)
        if m and item.function.__doc__:
            _titles.setdefault(int(m.group(1)), item.function.__doc__.strip().splitlines()[0])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(_criteria[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {_titles.get(n, '')}")
