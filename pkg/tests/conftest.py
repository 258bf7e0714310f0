import pytest

# criterion number -> (passed, message); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {msg}")


@pytest.fixture
def report():
    def _report(n, ok, msg):
        ACCEPTANCE[n] = (bool(ok), msg)
        print(f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {msg}")
        return ok
    return _report
