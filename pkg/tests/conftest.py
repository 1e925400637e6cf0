import numpy as np
import pytest

from inscribe import _backend

BACKENDS = sorted(_backend.available())

_criteria: dict[int, tuple[str, str]] = {}


@pytest.fixture(params=BACKENDS)
def kernels(request):
    """Each importable kernel implementation in turn."""
    return _backend.available()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for n, title in getattr(report, "criterion", ()):
        prev = _criteria.get(n, (title, "PASS"))[1]
        status = "PASS" if report.passed and prev == "PASS" else "FAIL"
        if report.skipped:
            status = "SKIP"
        _criteria[n] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion = [tuple(m.args) for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
