import os
from pathlib import Path

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        item.config.stash[_RESULTS][(number, item.name)] = (number, title, status, detail)


def _order(result):
    # criteria are numbered 1..11, extended variants carry a letter suffix
    text = str(result[0])
    digits = "".join(ch for ch in text if ch.isdigit())
    return int(digits), text


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(results.values(), key=_order):
        line = f"criterion {number}: {status}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def data_dir():
    """Directory holding real network edge lists; tests needing it skip when unset."""
    path = os.environ.get("OSP_DATA_DIR")
    if not path or not Path(path).is_dir():
        pytest.skip("set OSP_DATA_DIR to a directory of edge-list files")
    return Path(path)
