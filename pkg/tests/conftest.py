"""Per-criterion verdict lines for the acceptance suite.

Each acceptance test is named test_criterion_NN_*; the hook below collects
outcomes and prints one CRITERION line per test at the end of the run, with
any detail string the test left in NOTES.
"""

import re

import pytest

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")
_RESULTS: dict[int, str] = {}

# tests stash one-line details here via the criterion_notes fixture
NOTES: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call":
        _RESULTS[n] = "PASS" if report.passed else "FAIL"
    elif report.failed:  # setup/teardown error counts as a failure
        _RESULTS[n] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_RESULTS):
        note = NOTES.get(n, "")
        line = f"CRITERION {n:2d} {_RESULTS[n]}"
        if note:
            line += f"  ({note})"
        terminalreporter.write_line(line)


@pytest.fixture
def criterion_notes():
    return NOTES
