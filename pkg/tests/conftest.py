import os

import pytest

ACCEPTANCE: dict[int, dict] = {}


def pytest_addoption(parser):
    parser.addoption("--full", action="store_true", default=False,
                     help="run full-scale checks (N=160 and beyond)")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    os.environ.setdefault("SEGSOLVE_THREADS", "1")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--full"):
        return
    skip = pytest.mark.skip(reason="full-scale check; enable with --full")
    for item in items:
        if "full" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = ACCEPTANCE.setdefault(number, {"title": title, "status": "PASS", "details": []})
    if rep.skipped:
        if entry["status"] == "PASS":
            entry["status"] = "SKIP"
        entry["details"].append(rep.longrepr[-1] if isinstance(rep.longrepr, tuple) else "skipped")
    elif rep.failed:
        entry["status"] = "FAIL"
    if rep.when == "call" and getattr(item, "criterion_detail", None):
        entry["details"].append(item.criterion_detail)


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the acceptance summary."""
    def _record(text: str):
        request.node.criterion_detail = text
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        e = ACCEPTANCE[number]
        line = f"[{e['status']}] {number}. {e['title']}"
        if e["details"]:
            line += " -- " + "; ".join(e["details"])
        terminalreporter.write_line(line)
