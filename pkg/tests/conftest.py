import os

import pytest

os.environ.pop("TAILCERT_SEED", None)


@pytest.fixture
def seed():
    return 42


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(k: int, ok: bool, summary: str) -> None:
        ACCEPTANCE_LINES[k] = f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}: {summary}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
