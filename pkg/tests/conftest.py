import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20200725)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = ""
    if report.failed:
        detail = str(call.excinfo.value).strip().splitlines()[0] if call.excinfo else ""
    _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        line = f"criterion {number:2d} {status}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
