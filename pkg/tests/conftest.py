import numpy as np
import pytest


@pytest.fixture
def rng(request):
    # one reproducible stream per test, keyed by its name
    key = sum(request.node.name.encode())
    return np.random.default_rng([20240611, key])


_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.failed or report.when == "call":
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        passed = report.passed and _acceptance.get(number, (True,))[0]
        _acceptance[number] = (passed, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        passed, title, detail = _acceptance[number]
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
