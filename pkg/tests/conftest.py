import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_lines = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_lines] = []


@pytest.fixture
def criterion_line(request):
    """Record one pass/fail line for the end-of-run acceptance summary."""
    def record(text):
        print(text)
        request.config.stash[_lines].append(text)
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
