import shutil

import pytest

requires_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 executable not on PATH")

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num, text): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        prev = _criteria.get(num, (None, text))[0]
        if prev in (None, "PASS"):
            _criteria[num] = (status, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        status, text = _criteria[num]
        terminalreporter.write_line(f"AC{num:<3} {status:<5} {text}")
