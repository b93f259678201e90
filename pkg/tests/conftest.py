from fractions import Fraction as F

import pytest

from crossclaims.io import load_fixture


@pytest.fixture
def example1():
    return load_fixture("example1")


@pytest.fixture
def rmon():
    return load_fixture("rmon")


@pytest.fixture
def peff():
    return load_fixture("peff")


@pytest.fixture
def figure2():
    return load_fixture("figure2")


@pytest.fixture
def crastar_ex():
    return load_fixture("crastar_example")


def order_of(p, ids):
    return tuple(p.claimants.index(c) for c in ids)


def fr(*vals):
    return tuple(F(v) for v in vals)


# -- acceptance criteria report ----------------------------------------------

_criteria: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            key, title = mark.args
            _criteria.setdefault(key, {"title": title, "failed": [], "passed": 0})


def pytest_runtest_logreport(report):
    if report.when != "call" and not report.failed:
        return
    mark = dict(report.user_properties).get("criterion")
    if mark is None:
        return
    entry = _criteria[mark]
    if report.failed:
        entry["failed"].append(report.nodeid.split("::")[-1])
    elif report.when == "call":
        entry["passed"] += 1


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=int):
        entry = _criteria[key]
        if not entry["failed"] and not entry["passed"]:
            continue
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"{status}  criterion {key}: {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
