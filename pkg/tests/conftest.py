import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props:
                continue
            status = "PASS" if key == "passed" else "FAIL"
            if key == "xfailed":
                status = "FAIL (expected)"
            lines.append((props["criterion"], f"{status} criterion {props['criterion']}: "
                          f"{props['detail']}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(lines, key=lambda item: int(item[0].split()[0][:2].rstrip("ab"))):
            terminalreporter.write_line(text)
