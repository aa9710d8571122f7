"""Shared pytest setup: the ``criterion`` marker and its summary report.

Tests tagged ``@pytest.mark.criterion("C3", "title")`` are grouped by id; a
criterion passes only if every test carrying its id passed.  One line per
criterion is printed at the end of the run.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        cid, title = marker.args
        entry = _results.setdefault(cid, {"title": title, "ok": True, "tests": []})
        entry["ok"] &= report.passed
        entry["tests"].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_results, key=lambda c: int(c[1:])):
        entry = _results[cid]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"{cid:>4} {status}  {entry['title']}")
