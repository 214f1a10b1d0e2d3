import os

import pytest
from hypothesis import HealthCheck, settings

from mubound.curve import named_curve
from mubound.periods import PeriodEngine

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def e11():
    return PeriodEngine(named_curve("11a"))


@pytest.fixture(scope="session")
def e37():
    return PeriodEngine(named_curve("37a"))


@pytest.fixture(scope="session")
def engines(e11, e37):
    return {"11a": e11, "37a": e37}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("MUBOUND_CACHE_DIR", str(tmp_path / "cache"))


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance(request):
    """Record one line per acceptance criterion; lines are echoed in the terminal summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        log.append((number, line))
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
