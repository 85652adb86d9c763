"""Collects acceptance-criterion outcomes and prints one verdict line per criterion."""
import pytest

_OUTCOMES = {}   # criterion number -> list of (test name, passed, detail)
_NAMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, name): acceptance criterion a test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # a setup error counts against the criterion; otherwise only the call phase matters
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, name = marker.args
        _NAMES[number] = name
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        _OUTCOMES.setdefault(number, []).append((item.name, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        results = _OUTCOMES[number]
        passed = sum(ok for _, ok, _ in results)
        verdict = "PASS" if passed == len(results) else "FAIL"
        tr.write_line(f"criterion {number} ({_NAMES[number]}): {verdict} [{passed}/{len(results)} checks]")
        for test, ok, detail in results:
            if not ok or detail:
                tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {test}" + (f": {detail}" if detail else ""))
