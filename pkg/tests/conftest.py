import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("LACUNA_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line: ``record("3", "name", ok, "detail")``."""

    def _record(key, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
