import json
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"
GAUNTLET = FIXTURES / "gauntlet"


def fixture_bytes(name: str) -> bytes:
    return (GAUNTLET / name).read_bytes()


@pytest.fixture(scope="session")
def gauntlet_manifest():
    return json.loads((GAUNTLET / "manifest.json").read_text())


# One PASS/FAIL line per acceptance criterion, printed after the run.
_acceptance: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        name = report.nodeid.rsplit("::", 1)[1]
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance")
    for name in sorted(_acceptance):
        status, detail = _acceptance[name]
        number = name.split("_")[2]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}".rstrip())
