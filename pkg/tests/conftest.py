import pytest

_RESULTS: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion, printed after the run."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _RESULTS.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
