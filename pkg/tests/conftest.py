import pytest

# criterion number -> (passed, description, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(number: int, description: str, passed: bool, detail: str = "") -> bool:
    ACCEPTANCE[number] = (bool(passed), description, detail)
    print(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {description} {detail}")
    return bool(passed)


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, description, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {description}  {detail}")
