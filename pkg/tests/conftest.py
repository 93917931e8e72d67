import math

import pytest
from hypothesis import HealthCheck, settings

from eitcool.params import Geometry, LambdaParams, TrapParams

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def bench_params():
    return LambdaParams(17.0, 17.0, -70.0, 20.0)


@pytest.fixture
def bench_geom():
    return Geometry(0.01, 0.01, 0.0, math.pi)


@pytest.fixture
def bench_trap():
    return TrapParams(2.0, 12)


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = item.get_closest_marker("criterion")
    if criterion is None:
        return
    number = criterion.args[0]
    title = (item.function.__doc__ or item.name).strip().splitlines()[0]
    passed, title_prev = _CRITERIA.get(number, (True, title))
    if report.when == "call" or report.failed:
        _CRITERIA[number] = (passed and report.passed, title_prev)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")
