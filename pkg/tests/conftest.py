import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; returns a callable(number, ok, detail)."""
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
