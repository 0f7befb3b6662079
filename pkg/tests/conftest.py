import pytest

# criterion id -> (passed, detail), filled by the acceptance module
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def report():
    def _report(name: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE[name] = (bool(passed), detail)
        print(f"{name}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
