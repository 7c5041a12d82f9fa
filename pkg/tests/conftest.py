from __future__ import annotations

from pathlib import Path

import pytest

from swirl.syntax import parse_swirl

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str):
    return parse_swirl((FIXTURES / name).read_text())


@pytest.fixture
def ex2():
    return load_fixture("ex2.swirl")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def free_ports(n: int) -> list[int]:
    import socket

    socks = [socket.socket() for _ in range(n)]
    try:
        for s in socks:
            s.bind(("127.0.0.1", 0))
        return [s.getsockname()[1] for s in socks]
    finally:
        for s in socks:
            s.close()


# one summary line per acceptance criterion, whatever the verbosity

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): acceptance criterion with a time limit in seconds")
    config.stash[_CRITERIA] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title, limit = mark.args
    if report.passed and report.duration > limit:
        report.outcome = "failed"
        report.longrepr = f"criterion {number} took {report.duration:.2f}s, limit {limit}s"
    notes = "; ".join(str(v) for k, v in item.user_properties if k == "note")
    item.config.stash[_CRITERIA].append((number, title, report.passed, report.duration, limit, notes))


def pytest_terminal_summary(terminalreporter, config):
    merged: dict[int, list] = {}
    for number, title, ok, took, limit, notes in config.stash.get(_CRITERIA, []):
        row = merged.setdefault(number, [title, True, 0.0, limit, []])
        row[1] &= ok
        row[2] += took
        if notes:
            row[4].append(notes)
    if not merged:
        return
    terminalreporter.section("acceptance criteria")
    for number, (title, ok, took, limit, notes) in sorted(merged.items()):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'} {took:.2f}s (limit {limit:g}s) {title}"
        terminalreporter.write_line(line + (f" [{'; '.join(notes)}]" if notes else ""))
