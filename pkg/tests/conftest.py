import pytest

_criteria: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test decides")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    entry = _criteria.setdefault(marker.args[0], [True, []])
    entry[0] = entry[0] and report.passed
    detail = getattr(item, "criterion_detail", None)
    if detail and report.when == "call":
        entry[1].append(detail)


@pytest.fixture
def record(request):
    """Attach a short measurement string to the criterion line."""

    def _record(text):
        request.node.criterion_detail = text

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, (passed, details) in _criteria.items():
        suffix = f"  ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}{suffix}")
