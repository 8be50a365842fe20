import sys

import pytest

from qssr.network import load_model
from qssr.qss import QssSplit


@pytest.fixture(scope="session")
def mm():
    return load_model("mm_irrev").system()


@pytest.fixture(scope="session")
def mm_rev():
    return load_model("mm_rev").system()


def split_of(odes, qss):
    return QssSplit.of(odes, qss)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.summary_lines():
            terminalreporter.write_line(line)
