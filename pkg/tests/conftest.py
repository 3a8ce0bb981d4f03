import pytest

from awareness.configuration import load_fixture

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _acceptance.append((marker.args[0], marker.args[1], item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, name, passed in sorted(_acceptance):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number}: {title}  [{name}]")


@pytest.fixture(scope="session")
def fixture():
    return load_fixture()
