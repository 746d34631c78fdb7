import pytest

# criterion number -> [title, passed, detail]
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.fixture
def note(request):
    """Attach a measured detail to the criterion line of the running test."""
    marker = request.node.get_closest_marker("criterion")

    def write(detail: str):
        ACCEPTANCE.setdefault(marker.args[0], [marker.args[1], False, ""])[2] = detail

    return write


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    row = ACCEPTANCE.setdefault(marker.args[0], [marker.args[1], False, ""])
    row[1] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
