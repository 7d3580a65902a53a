"""Shared fixtures and the per-criterion summary for the acceptance suite."""
import os
import pathlib
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    name = marker.args[0]
    ok = call.excinfo is None
    _RESULTS[name] = _RESULTS.get(name, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_RESULTS, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if _RESULTS[name] else 'FAIL'}  {name}")


@pytest.fixture
def data_dir():
    return pathlib.Path(__file__).parent / "data"
