import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    results = item.config._criteria
    number, title = mark.args
    prev = results.get(number, (title, "PASS", 0.0))
    status = prev[1]
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        status = "FAIL"
    duration = prev[2] + (call.duration if call.when == "call" else 0.0)
    results[number] = (title, status, duration)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status, duration = results[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title} ({duration:.2f} s)")
