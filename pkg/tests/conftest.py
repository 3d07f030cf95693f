from __future__ import annotations

import pytest

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the terminal summary prints them all."""

    def record(key: str, passed: bool, detail: str) -> bool:
        _CRITERIA[key] = (bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}")
        return passed

    return record


def _order(key: str):
    head = key.split()[0]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 99, key)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=_order):
        passed, detail = _CRITERIA[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}: {detail}")
