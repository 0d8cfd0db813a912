import pytest

ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store one acceptance line; printed again in the terminal summary."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.setdefault(criterion, []).append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        for line in ACCEPTANCE[c]:
            terminalreporter.write_line(line)


@pytest.fixture
def accept():
    return record
