import sys
from pathlib import Path

import pytest

# test modules import the shared drivers in helpers.py
sys.path.insert(0, str(Path(__file__).resolve().parent))

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.skipped:
        return
    number, title = marker.args
    passed, _ = _criteria.get(number, (True, title))
    if report.failed or (report.when == "call" and not report.passed):
        passed = False
    _criteria[number] = (passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        passed, title = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}")
