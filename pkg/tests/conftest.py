import pytest

_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance line; the terminal summary prints them in order."""

    def record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2}: {status}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
