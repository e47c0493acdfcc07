"""Shared helpers plus a terminal summary that prints one line per
acceptance criterion after the run."""

import pytest

from arpps.geodesy import GeoPoint
from arpps.pipe_model import NetworkSpec, generate_network


def build_network(seed: int = 7, points: int = 120, extent: float = 400.0):
    spec = NetworkSpec(seed=seed, center=GeoPoint(116.0, 40.0, 50.0),
                       extent=extent, point_count=points)
    return generate_network(spec)


@pytest.fixture(scope="session")
def small_network():
    return build_network()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in rep.nodeid:
                continue
            if getattr(rep, "when", "call") == "teardown":
                continue
            name = rep.nodeid.split("::")[-1]
            # a setup/call failure must never be shadowed by a passing phase
            if results.get(name) != "failed":
                results[name] = "failed" if outcome in ("failed", "error") else "passed"
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        status = "PASS" if results[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
