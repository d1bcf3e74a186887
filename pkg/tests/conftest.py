import re

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_docs = {}
_results = {}


def pytest_collection_modifyitems(items):
    for item in items:
        match = _CRITERION.search(item.nodeid)
        if match:
            _docs[int(match.group(1))] = (item.function.__doc__ or "").strip()


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    key = int(match.group(1))
    status, duration = _results.get(key, ("PASS", 0.0))
    if report.failed:
        status = "FAIL"
    elif report.skipped and status != "FAIL":
        status = "SKIP"
    if report.when == "call":
        duration = report.duration
    _results[key] = (status, duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results):
        status, duration = _results[key]
        terminalreporter.write_line(f"criterion {key}: {status}  ({duration:.2f} s)  {_docs.get(key, '')}")
