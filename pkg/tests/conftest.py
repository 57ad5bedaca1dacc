import re

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_bytes(seed: int, size: int) -> bytes:
    return np.random.default_rng(seed).bytes(size)


# The acceptance tests register a one-line summary per criterion; outcomes are
# collected here and printed after the run so they survive output capture.

acceptance_details = {}
_acceptance_outcomes = {}

_CRITERION = re.compile(r"test_criterion_(\w+?)_")


def _criterion_label(nodeid):
    match = _CRITERION.search(nodeid)
    return match.group(1) if match else None


def pytest_runtest_logreport(report):
    label = _criterion_label(report.nodeid)
    if label is None:
        return
    if report.failed:
        _acceptance_outcomes[label] = "failed"
    elif report.when == "call":
        _acceptance_outcomes.setdefault(label, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _acceptance_outcomes.items():
        if outcome == "passed":
            detail = acceptance_details.get(label, "")
            terminalreporter.write_line(
                f"ACCEPTANCE {label} PASS" + (f": {detail}" if detail else ""))
        elif outcome == "skipped":
            terminalreporter.write_line(f"ACCEPTANCE {label} SKIPPED")
        else:
            terminalreporter.write_line(f"ACCEPTANCE {label} FAIL")
