import time

import numpy as np
import pytest

SUITE_BUDGET_S = 180.0

_criteria: dict[str, tuple[str, bool]] = {}
_t0 = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion with a one-line report")


def pytest_sessionstart(session):
    _t0[0] = time.perf_counter()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        label = marker.args[0]
        prev = _criteria.get(item.nodeid, (label, True))[1]
        _criteria[item.nodeid] = (label, prev and rep.outcome == "passed")


def _suite_ran_everything(session):
    return session.testscollected > 0 and not session.config.option.keyword and not session.config.option.markexpr


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _t0[0]
    session.config._suite_elapsed = elapsed
    if _suite_ran_everything(session) and elapsed > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, ok in sorted(_criteria.values(), key=lambda v: v[0]):
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
    elapsed = getattr(config, "_suite_elapsed", None)
    if elapsed is not None and _suite_ran_everything(tr._session):
        ok = elapsed <= SUITE_BUDGET_S
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  AC9 full suite in {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
