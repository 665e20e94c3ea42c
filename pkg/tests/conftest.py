import pytest

# filled by tests/test_acceptance.py: criterion -> (passed, detail)
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(name: str, passed: bool, detail: str = ""):
        ACCEPTANCE[name] = (bool(passed), detail)
        print(f"{name}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split("-")[1])):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}")
