import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow", action="store_true", default=False,
        help="run the multi-hour benchmark acceptance runs",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: hours-long benchmark runs, opt-in via --run-slow")
    config.addinivalue_line("markers", "acceptance: acceptance criterion tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="long benchmark run; pass --run-slow to enable")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    tr = terminalreporter
    lines = []
    for status in ("passed", "failed", "skipped"):
        for rep in tr.stats.get(status, []):
            if not hasattr(rep, "keywords") or "acceptance" not in rep.keywords:
                continue
            if status != "skipped" and getattr(rep, "when", "call") != "call":
                continue
            lines.append((rep.nodeid, status))
    if lines:
        tr.write_sep("=", "acceptance criteria")
        for nodeid, status in sorted(set(lines)):
            tr.write_line(f"[{status.upper():>7s}] {nodeid}")
