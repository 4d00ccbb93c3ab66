import pytest

_RESULTS: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number): acceptance criterion the test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.skipped and rep.when != "setup":
        return
    if rep.when == "call" or rep.failed:
        details = [f"{k}={v}" for k, v in item.user_properties]
        _RESULTS.setdefault(marker.args[0], []).append((item.name, rep.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entries = _RESULTS[number]
        ok = all(outcome == "passed" for _, outcome, _ in entries)
        names = ", ".join(name for name, _, _ in entries)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  ({names})")
        for name, outcome, details in entries:
            if details:
                terminalreporter.write_line(f"    {name} [{outcome}]: " + "; ".join(details))
