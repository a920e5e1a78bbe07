import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    name = mark.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        prev = _RESULTS.get(name, ("pass", []))
        status = prev[0] if rep.passed else "FAIL" if rep.failed else "skip"
        if prev[0] == "FAIL":
            status = "FAIL"
        details = prev[1] + [v for k, v in item.user_properties if k == "detail"]
        _RESULTS[name] = (status, details)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, details) in _RESULTS.items():
        line = f"{status.upper():4s}  {name}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)


@pytest.fixture
def detail(record_property):
    """Attach a short measured value to the acceptance summary line."""

    def add(text):
        record_property("detail", text)

    return add
