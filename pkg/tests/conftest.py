"""Shared fixtures and the acceptance-summary hook.

Acceptance tests record one verdict per criterion through the
``criteria`` fixture; the terminal summary prints one PASS/FAIL line
for each recorded criterion after the run.
"""

from __future__ import annotations

import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def criteria():
    """Recorder for acceptance verdicts: criteria(number, label, passed, detail)."""

    def record(number: int, label: str, passed: bool, detail: str = "") -> bool:
        _RESULTS[number] = (label, bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_RESULTS):
        label, passed, detail = _RESULTS[number]
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {label}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
