import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bandsel import _backend  # noqa: E402


def _available_backends():
    names = ["python"]
    try:
        _backend.load("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion

_CRITERIA = {}


@pytest.fixture
def record(request):
    """Attach a short measurement to the acceptance summary line."""
    def _record(text):
        request.node.user_properties.append(("detail", text))
    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = [v for k, v in item.user_properties if k == "detail"]
        _CRITERIA[marker.args[0]] = (marker.args[1], rep.outcome, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome, detail = _CRITERIA[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] {num:2d}. {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
