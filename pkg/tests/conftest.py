from __future__ import annotations

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
