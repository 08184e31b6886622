import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402
from cmc1 import solver  # noqa: E402


@pytest.fixture(scope="session")
def table_core():
    return solver.table(range(1, 9), 2.0)


@pytest.fixture(scope="session")
def table_extended():
    return solver.table(range(9, 21), 2.0)


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.LINES
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
