import pytest

CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion():
    """Record the verdict of one acceptance criterion: ``criterion(n, ok, detail)``;
    ``ok=None`` marks it skipped."""

    def record(n, ok, detail=""):
        CRITERIA[n] = ("SKIP" if ok is None else "PASS" if ok else "FAIL", detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        verdict, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {detail}")
