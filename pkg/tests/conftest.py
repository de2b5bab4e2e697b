import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from rdkernel.model import ModelParams  # noqa: E402

DEFAULT_BATTERY = [ModelParams(1, 1, 1, 1), ModelParams(1, 2, 0.5, 1), ModelParams(2, 1, 3, 0.25)]


@pytest.fixture(params=DEFAULT_BATTERY, ids=lambda p: f"a{p.a}-b{p.b}-beta{p.beta}-eps{p.eps}")
def battery_params(request):
    return request.param


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _ACCEPTANCE.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, outcome, detail in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {crit:2d}: {status}  {detail}")
