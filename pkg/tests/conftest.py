from __future__ import annotations

import pytest

from kleinsail.config import example_config
from kleinsail.pipeline import verify_example


@pytest.fixture(scope="session")
def example_runs():
    """(analysis, golden result, document) per example, computed once."""
    cache = {}

    def get(n: int):
        if n not in cache:
            cache[n] = verify_example(example_config(n))
        return cache[n]

    return get


@pytest.fixture(scope="session")
def ex1(example_runs):
    return example_runs(1)[0]


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
