import numpy as np
import pytest

from sensorleak.core import SensorKind, SensorTrace, Session, Labels
from sensorleak.synth import write_uci_like

# criterion number -> (description, outcome), from tests marked acceptance(num, desc)
ACCEPTANCE_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, desc = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        prev = ACCEPTANCE_RESULTS.get(num, (desc, "PASS"))[1]
        # a criterion spread over several tests passes only if all of them do
        rank = {"PASS": 0, "SKIP": 1, "FAIL": 2}
        notes = [v for k, v in report.user_properties if k == "note"]
        if notes:
            desc = f"{desc} ({'; '.join(notes)})"
        ACCEPTANCE_RESULTS[num] = (desc, max(prev, status, key=rank.get))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        desc, outcome = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{outcome}] {num:>2}. {desc}")


def make_session(subject="s1", n=20, sensors=tuple(SensorKind), seed=0, **labels):
    rng = np.random.default_rng(seed)
    traces = {k: SensorTrace.from_arrays(k, rng.normal(size=(n, 3))) for k in sensors}
    return Session(subject, traces, Labels.from_text(labels or {"gender": "Male"}))


@pytest.fixture
def session_factory():
    return make_session


@pytest.fixture(scope="session")
def uci_replica(tmp_path_factory):
    """Stand-in dataset in the published UCI HAR test-split layout."""
    root = tmp_path_factory.mktemp("uci") / "UCI HAR Dataset"
    return write_uci_like(root, "test", seed=3)
