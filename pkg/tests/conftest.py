"""Shared pytest plumbing: the acceptance tests register one verdict line
each, and the terminal summary prints them after the run (stdout capture
would otherwise swallow them on passing tests)."""

import pytest

acceptance_lines: dict[tuple[int, str], str] = {}


@pytest.fixture
def verdict():
    return record_verdict


def record_verdict(number: int, passed: bool, detail: str, suffix: str = ""):
    word = "PASS" if passed else "FAIL"
    acceptance_lines[(number, suffix)] = f"ACCEPTANCE {number:2d}{suffix}: {word} - {detail}"


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(acceptance_lines):
        terminalreporter.write_line(acceptance_lines[key])
